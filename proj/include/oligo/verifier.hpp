#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/mpne_solver.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/symmetric_equiv.hpp"

namespace oligo {

enum class Verdict { Equivalent, NotEquivalent, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::NotEquivalent: return "NotEquivalent";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct Thresholds {
  double equivalent = 1e-6;
  double not_equivalent = 1e-4;

  static Thresholds closed_form() { return {1e-6, 1e-4}; }
  static Thresholds numeric() { return {1e-4, 1e-2}; }
};

struct IdentificationNorms {
  double f_defect = 0.0;
  double gamma_defect = 0.0;
};

struct ConcavitySample {
  double x = 0.0;
  double u = 0.0;
  double value = 0.0;
  int sign = 0;
};

struct EquivalenceReport {
  Verdict verdict = Verdict::Inconclusive;
  ResidualNorms control_pde;
  IdentificationNorms identification;
  double foc = 0.0;
  std::vector<ConcavitySample> concavity;
  bool concavity_ok = true;
  double competition_index = 0.0;
  Thresholds thresholds;
  std::string path;  // closed_form | numeric
  std::vector<std::string> notes;
};

/// u_t + f(u)·u_x − ρ·γ(u)/γ′(u) on the strategy grid (source dropped when ρ = 0).
inline ResidualNorms control_pde_residual(const FeedbackStrategy& s, const MonopolyProblem& oc) {
  const Curve f = oc.f, gamma = oc.gamma;
  const double rho = oc.rho;
  return detail::strategy_residual(s, [&](double u, double ut, double ux) {
    if (!f.domain().contains(u)) return std::numeric_limits<double>::quiet_NaN();
    double source = 0.0;
    if (rho != 0.0) {
      const double dg = gamma.slope(u);
      if (dg == 0.0) throw SingularityError("coestate derivative vanishes on the strategy range", u);
      source = rho * gamma(u) / dg;
    }
    return ut + f(u) * ux - source;
  });
}

/// Pointwise defects of f = −Nu + (N−1)(e1 − e_{-1}) and ρ·γ/γ′ = −r·e1 on a 50-point grid.
inline IdentificationNorms identification_check(const RiskProfile& p, const MonopolyProblem& oc, int N,
                                                std::size_t points = 50) {
  const auto us = numerics::logspace(oc.work_range.lo, oc.work_range.hi, points);
  return {identification_defect_dynamics(p, oc.f, N, us),
          identification_defect_gamma(p, oc.gamma, oc.rho, oc.r, us)};
}

inline std::vector<std::pair<double, double>> concavity_grid(Interval xr, Interval ur, std::size_t n = 20) {
  std::vector<std::pair<double, double>> pts;
  const auto xs = numerics::linspace(xr.lo, xr.hi, n);
  const auto us = numerics::logspace(ur.lo, ur.hi, n);
  for (double x : xs)
    for (double u : us) pts.emplace_back(x, u);
  return pts;
}

namespace detail {

inline int concavity_sign(double v, double scale) {
  if (std::abs(v) <= 1e-12 * std::max(1.0, scale)) return 0;
  return v < 0.0 ? -1 : 1;
}

}  // namespace detail

/// Own-control curvature of the control problem's pre-Hamiltonian ℓ(u) + p·f(u),
/// with p = γ(u) (the costate along the feedback). Nonnegative samples are violations.
inline std::vector<ConcavitySample> hamiltonian_concavity_check(const MonopolyProblem& oc,
                                                                const std::vector<std::pair<double, double>>& pts) {
  std::vector<ConcavitySample> out;
  out.reserve(pts.size());
  for (const auto& [x, u] : pts) {
    const double l2 = oc.ell.second(u);
    const double fp = oc.f.second(u) * oc.gamma(u);
    const double v = l2 + fp;
    out.push_back({x, u, v, detail::concavity_sign(v, std::abs(l2) + std::abs(fp))});
  }
  return out;
}

/// Game side: the own-control curvature is L_own_own (dynamics are linear in the control).
inline std::vector<ConcavitySample> hamiltonian_concavity_check(const GameSpec& g,
                                                                const std::vector<std::pair<double, double>>& pts) {
  std::vector<ConcavitySample> out;
  out.reserve(pts.size());
  for (const auto& [x, u] : pts) {
    const double v = partials(g.utility, g.N, u, u, g.rate_domain).L_own_own;
    out.push_back({x, u, v, detail::concavity_sign(v, std::abs(v))});
  }
  return out;
}

inline bool concavity_violated(const std::vector<ConcavitySample>& s) {
  return std::any_of(s.begin(), s.end(), [](const ConcavitySample& c) { return c.sign >= 0; });
}

struct CobbDouglasOracle {
  double c = 0.0;     // linear MPNE slope u = c·x
  double eta1 = 0.0;  // e1 = η1·u
  double eta2 = 0.0;  // e_{-1} = η2·u
  double m = 0.0;     // γ ∝ u^{−m}
  double k_f = 0.0;   // f = k_f·u
  double CI = 0.0;
};

inline CobbDouglasOracle cobb_douglas_oracle(double alpha, double beta, int N, double r, double rho) {
  if (N < 1) throw ParameterError("N must be at least 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ParameterError("alpha and beta must be positive");
  if (alpha == 1.0) throw ParameterError("alpha = 1 divides by 1 - alpha");
  const double k = -alpha + (N - 1) * (1.0 - beta);
  if (!(k < 0.0)) throw ParameterError("standing condition -alpha + (N-1)(1-beta) < 0 fails");
  if (rho > 0.0 && !(r > 0.0)) throw ParameterError("rho > 0 needs r > 0");
  CobbDouglasOracle o;
  o.eta1 = -1.0 / k;
  o.eta2 = N > 1 ? -((1.0 - beta) / (1.0 - alpha)) / k : 0.0;
  o.k_f = -N + (N - 1) * (o.eta1 - o.eta2);
  o.c = r * o.eta1 / (N - (N - 1) * (o.eta1 - o.eta2));
  o.m = rho > 0.0 ? rho / (o.eta1 * r) : 0.0;
  o.CI = (static_cast<double>(N - 1) / N) * (o.eta1 - o.eta2);
  return o;
}

struct VerifyOptions {
  std::optional<Thresholds> thresholds;  // default picked from the monopoly's provenance
  std::size_t concavity_points = 20;
  double ci_at = 1.0;
};

/// Full equivalence report for a symmetric game, its fictitious monopoly and an MPNE.
inline EquivalenceReport verify(const GameSpec& g, const RiskProfile& p, const MonopolyProblem& oc,
                                const FeedbackStrategy& s, const VerifyOptions& o = {}) {
  EquivalenceReport rep;
  const bool closed = oc.provenance == Provenance::analytic && s.provenance != "characteristics";
  rep.path = closed ? "closed_form" : "numeric";
  rep.thresholds = o.thresholds.value_or(closed ? Thresholds::closed_form() : Thresholds::numeric());
  rep.control_pde = control_pde_residual(s, oc);
  rep.identification = identification_check(p, oc, g.N);
  const auto us = numerics::logspace(oc.work_range.lo, oc.work_range.hi, 50);
  rep.foc = foc_defect(oc.ell, oc.f, oc.gamma, std::vector<double>(us.begin() + 15, us.begin() + 35));

  Interval xr{0.0, 1.0};
  if (s.stationary()) {
    xr = s.curve().domain();
  } else {
    xr = {s.grid().x.front(), s.grid().x.back()};
  }
  rep.concavity = hamiltonian_concavity_check(oc, concavity_grid(xr, oc.work_range, o.concavity_points));
  rep.concavity_ok = !concavity_violated(rep.concavity);
  rep.competition_index = competition_index(p, g.N, o.ci_at);

  const double worst = std::max({rep.control_pde.sup, rep.identification.f_defect, rep.identification.gamma_defect,
                                 rep.foc});
  if (rep.control_pde.degenerate) rep.notes.push_back("control residual grid is degenerate");
  if (!std::isfinite(worst) || worst > rep.thresholds.not_equivalent) {
    rep.verdict = Verdict::NotEquivalent;
  } else if (worst <= rep.thresholds.equivalent && rep.concavity_ok && !rep.control_pde.degenerate) {
    rep.verdict = Verdict::Equivalent;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  if (!rep.concavity_ok) rep.notes.push_back("pre-Hamiltonian is not strictly concave at some sampled points");
  rep.notes.push_back("checked on bounded grids only");
  return rep;
}

}  // namespace oligo
