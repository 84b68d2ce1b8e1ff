// Cobb-Douglas duopoly: build the fictitious monopoly, solve the MPNE, check they agree.
#include <cstdio>

#include "oligo/numerics/grid.hpp"
#include "oligo/oligo.hpp"

int main() {
  using namespace oligo;
  GameSpec g;
  g.N = 2;
  g.r = 0.05;
  g.utility = CobbDouglas{0.6, 0.8};

  const RiskProfile p = symmetric_reduce(g);
  const MonopolyProblem oc = derive_monopoly(g);
  const FeedbackStrategy s = stationary_mpne(g, p, numerics::linspace(0.0, 10.0, 101));
  const EquivalenceReport rep = verify(g, p, oc, s);

  std::printf("eta1 = %.6g, eta2 = %.6g\n", *p.eta1, *p.eta2);
  std::printf("monopoly: f(u) = %.6g u, gamma ~ u^-%.6g, C = %g\n", *oc.k_f, *oc.m, oc.C);
  std::printf("MPNE: u(5) = %.12g (x/6 = %.12g)\n", s.curve()(5.0), 5.0 / 6.0);
  std::printf("competition index: %.6g\n", rep.competition_index);
  std::printf("verdict: %s (control residual %.3g, concavity %s)\n", verdict_name(rep.verdict), rep.control_pde.sup,
              rep.concavity_ok ? "ok" : "violated");

  std::printf("\n  u        f(u)        gamma(u)    ell(u)\n");
  for (double u : {0.25, 0.5, 1.0, 2.0, 4.0})
    std::printf("  %-6g  %-10.6g  %-10.6g  %-10.6g\n", u, oc.f(u), oc.gamma(u), oc.ell(u));
  return rep.verdict == Verdict::Equivalent ? 0 : 1;
}
