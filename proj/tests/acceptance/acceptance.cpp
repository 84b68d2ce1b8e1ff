// Acceptance criteria: `acceptance <id>` runs one, no argument runs all.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oligo/additive_duopoly.hpp"
#include "oligo/asym_duopoly.hpp"
#include "oligo/cli/config.hpp"
#include "oligo/mpne_solver.hpp"
#include "oligo/numerics/finite_difference.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/verifier.hpp"

using namespace oligo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

GameSpec cd(double a, double b, int N, double r = 0.05) {
  GameSpec g;
  g.N = N;
  g.r = r;
  g.utility = CobbDouglas{a, b};
  return g;
}

GameSpec pricing(double q, int N, double r) {
  GameSpec g;
  g.N = N;
  g.r = r;
  g.utility = IsoelasticPricing{1.0, q, ScalarFunction::zero()};
  return g;
}

GameSpec additive_exp() {
  GameSpec g;
  g.N = 2;
  g.r = 0.05;
  g.rate_domain = {0.01, 20.0};
  g.utility = AdditiveSeparable{ScalarFunction::exp(-1.0, -1.0), ScalarFunction::linear(-0.2)};
  return g;
}

GameSpec custom_cd() {
  GameSpec g;
  g.N = 2;
  g.r = 0.05;
  g.rate_domain = {0.05, 20.0};
  Custom c;
  c.L = [](double u, double v, int N) { return std::pow(u, 0.4) / 0.4 * std::pow(v, (N - 1) * 0.2); };
  g.utility = c;
  return g;
}

struct Case {
  std::string name;
  GameSpec g;
  DeriveOptions o;
};

std::vector<Case> derive_cases() {
  std::vector<Case> cs;
  cs.push_back({"CD(0.6,0.8,N=2)", cd(0.6, 0.8, 2), {}});
  cs.push_back({"CD(0.5,1.0,N=4)", cd(0.5, 1.0, 4), {}});
  cs.push_back({"CD(2.0,0.3,N=3)", cd(2.0, 0.3, 3), {}});
  DeriveOptions q;
  q.force_quadrature = true;
  cs.push_back({"CD(0.6,0.8,N=2) quadrature", cd(0.6, 0.8, 2), q});
  DeriveOptions pr;
  pr.rho = 0.05;
  cs.push_back({"pricing(q=0.5,N=2)", pricing(0.5, 2, 0.1), pr});
  pr.force_quadrature = true;
  cs.push_back({"pricing(q=0.5,N=2) quadrature", pricing(0.5, 2, 0.1), pr});
  cs.push_back({"additive exp", additive_exp(), {}});
  cs.push_back({"custom CD", custom_cd(), {}});
  return cs;
}

// CI for the duopoly from the oracle and the pipeline, against the target 0.25
Outcome c1() {
  const auto o = cobb_douglas_oracle(0.6, 0.8, 2, 0.05, 0.05);
  const auto p = symmetric_reduce(cd(0.6, 0.8, 2));
  const double pipe = competition_index(p, 2, 1.0);
  const bool ok = o.CI == 0.25 && std::abs(pipe - 0.25) <= 1e-10;
  return {ok, "oracle CI=" + num(o.CI) + " pipeline CI=" + num(pipe) + " expected 0.25"};
}

Outcome c2() {
  double worst = 0.0;
  // α = β must also satisfy −α + (N−1)(1−α) < 0, i.e. α > 4/5 for N = 5
  for (double a : {0.81, 0.83, 0.85, 0.87, 0.89})
    for (int N : {2, 3, 5}) {
      const auto p = symmetric_reduce(cd(a, a, N));
      for (double u : {0.1, 1.0, 10.0}) worst = std::max(worst, std::abs(competition_index(p, N, u)));
    }
  return {worst <= 1e-12, "max |CI| = " + num(worst)};
}

Outcome c3() {
  double worst = 0.0;
  for (int N = 2; N <= 6; ++N)
    for (double a : {0.3, 0.5, 2.0}) {
      const auto p = symmetric_reduce(cd(a, 1.0, N));
      const double want = (N - 1.0) / (N * a);
      worst = std::max(worst, std::abs(competition_index(p, N, 1.0) - want));
    }
  return {worst <= 1e-12, "max |CI − (N−1)/(Nα)| = " + num(worst)};
}

Outcome c4() {
  bool ok = true;
  std::string d;
  for (auto& c : derive_cases()) {
    c.o.validate = false;
    const auto t0 = std::chrono::steady_clock::now();
    const auto mp = derive_monopoly(c.g, c.o);
    const auto p = symmetric_reduce(c.g);
    const auto idn = identification_check(p, mp, c.g.N, 50);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double tol = mp.provenance == Provenance::analytic ? 1e-8 : 1e-5;
    const bool here = idn.f_defect <= 1e-8 && idn.gamma_defect <= tol && secs < 5.0;
    ok = ok && here;
    d += (d.empty() ? "" : "; ") + c.name + " f=" + num(idn.f_defect) + " gamma=" + num(idn.gamma_defect) +
         (here ? "" : " FAIL");
  }
  return {ok, d};
}

Outcome c5() {
  bool ok = true;
  std::string d;
  for (auto& c : derive_cases()) {
    c.o.validate = false;
    const auto mp = derive_monopoly(c.g, c.o);
    const auto us = numerics::logspace(mp.work_range.lo, mp.work_range.hi, 50);
    const double foc = foc_defect(mp.ell, mp.f, mp.gamma, std::vector<double>(us.begin() + 15, us.begin() + 35));
    ok = ok && foc <= 1e-6;
    d += (d.empty() ? "" : "; ") + c.name + " " + num(foc);
  }
  return {ok, d};
}

Outcome c6() {
  const auto g = cd(0.6, 0.8, 2);
  const auto p = symmetric_reduce(g);
  const auto s = stationary_mpne(g, p, numerics::linspace(0.1, 10.0, 200));
  double worst = 0.0;
  for (double x : numerics::linspace(0.1, 10.0, 1000)) {
    const double want = x / 6.0;
    worst = std::max(worst, std::abs(s.curve()(x) - want) / want);
  }
  return {worst <= 1e-6, "max relative error vs x/6 = " + num(worst)};
}

Outcome c7() {
  const auto g = cd(0.6, 0.8, 2);
  const auto p = symmetric_reduce(g);
  const auto oc = derive_monopoly(g);
  const auto s = stationary_mpne(g, p, numerics::linspace(0.1, 10.0, 200));
  const auto n = control_pde_residual(s, oc);
  return {n.sup <= 1e-6 && !n.degenerate, "sup |f u' − ργ/γ'| = " + num(n.sup) + " on " + std::to_string(n.nodes) +
                                              " nodes"};
}

Outcome c8() {
  auto g = cd(0.6, 0.8, 2, 0.0);
  const double T = 2.0;
  g.horizon = FiniteHorizon{T, ScalarFunction::power(1.0 / 0.6, 0.6)};  // φ(x) = x
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::logspace(0.05, 20.0, 400));
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ut(0.0, T), ux(0.5, 5.0);
  std::vector<double> ts(10), xs(10);
  for (auto& t : ts) t = ut(rng);
  for (auto& x : xs) x = ux(rng);
  std::sort(ts.begin(), ts.end());
  std::sort(xs.begin(), xs.end());
  const auto s = characteristics_mpne(g, p, phi, ts, xs);
  const auto a = [&](double u) { return -2.0 * u + (*p.eta1 - *p.eta2) * u; };
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double u = s.grid().u[i][j];
      worst = std::max(worst, std::abs(u - phi.value(xs[j] + a(u) * (T - ts[i]))));
    }
  return {worst <= 1e-8, "max |u − φ(x + a(u)(T−t))| over 100 random nodes = " + num(worst)};
}

Outcome c9() {
  DeriveOptions o;
  o.rho = 0.05;  // ρ/r = 0.5
  o.force_quadrature = true;
  const auto mp = derive_monopoly(pricing(0.5, 2, 0.1), o);
  const double K = numerics::fd_derivative([&](double z) { return mp.ell(z); }, 1.0);
  double worst = 0.0;
  for (double u : numerics::logspace(0.2, 5.0, 20)) {
    const double dl = numerics::fd_derivative([&](double z) { return mp.ell(z); }, u);
    const double want = K * std::pow(u, -0.25);
    worst = std::max(worst, std::abs(dl - want) / std::abs(want));
  }
  return {worst <= 1e-6, "max relative defect of ℓ' vs K·u^-0.25 = " + num(worst)};
}

Outcome c10() {
  const fs::path out = fs::temp_directory_path() / "oligo_acceptance_10";
  fs::remove_all(out);
  const std::string cmd = std::string("\"") + OLIGO_CLI_PATH + "\" --config \"" + OLIGO_DEMO_DIR +
                          "/configs/negative_externality.json\" --out \"" + out.string() + "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::string verdict = "?";
  std::size_t witnesses = 0;
  double min_disc = std::nan("");
  if (fs::exists(out / "report.json")) {
    std::ifstream in(out / "report.json");
    const auto j = cli::json::parse(in);
    verdict = j["verdict"].get<std::string>();
    witnesses = j["witnesses"].size();
    min_disc = j["constants"]["min_discriminant"].get<double>();
  }
  const bool ok = code == 2 && verdict == "NotRationalizable" && witnesses > 0;
  return {ok, "exit " + std::to_string(code) + ", verdict " + verdict + ", " + std::to_string(witnesses) +
                  " witnesses, min discriminant " + num(min_disc)};
}

Outcome c11() {
  AdditiveSpec s;
  s.own1 = ScalarFunction::exp(-1.0, -1.0);
  s.own2 = ScalarFunction::exp(-0.5, -2.0);
  s.cross1 = ScalarFunction::linear(0.3);
  s.cross2 = ScalarFunction::linear(-0.2);
  const auto g1 = numerics::linspace(0.5, 1.0, 50), g2 = numerics::linspace(0.5, 2.0, 50);
  double worst = 0.0;
  bool ordered = true;
  std::size_t n = 0;
  for (double u1 : g1)
    for (double u2 : g2) {
      if (!(discriminant(s, u1, u2) > 0.0)) continue;
      ++n;
      const auto e = eigen_pair(s, u1, u2);
      const auto A = build_matrix_A(s, u1, u2);
      for (auto [v, l] : {std::pair{e.s_lambda, e.lambda}, {e.s_mu, e.mu}}) {
        const auto Av = mat_vec(A, v);
        worst = std::max({worst, std::abs(Av[0] - l * v[0]), std::abs(Av[1] - l * v[1])});
      }
      ordered = ordered && e.lambda > e.mu;
    }
  return {n == 2500 && worst <= 1e-10 && ordered,
          std::to_string(n) + " points, max ‖As − eig·s‖∞ = " + num(worst) + (ordered ? ", λ > μ" : ", λ ≤ μ somewhere")};
}

Outcome c12() {
  const AsymParams ap{0.6, 0.6, 0.8, 0.05, 0.05};
  const double d = solve_delta(ap);
  const auto a = asym_fictitious(ap, d, 0.05, 1.0);
  DeriveOptions o;
  o.rho = 0.05;
  o.C = 1.0;
  const auto s = derive_monopoly(cd(0.6, 0.8, 2), o);
  double worst = 0.0;
  for (double u : numerics::logspace(0.1, 10.0, 200)) {
    worst = std::max({worst, std::abs(a.f(u) - s.f(u)), std::abs(a.gamma(u) - s.gamma(u)),
                      std::abs(a.ell(u) - s.ell(u))});
  }
  return {std::abs(d - 1.0) <= 1e-12 && worst <= 1e-8,
          "|δ − 1| = " + num(std::abs(d - 1.0)) + ", max |asym − symmetric| over f, γ, ℓ = " + num(worst)};
}

Outcome c13() {
  auto g = cd(0.6, 0.8, 2);
  g.horizon = FiniteHorizon{1.0, ScalarFunction::log(1.0)};
  DeriveOptions o;
  o.rho = 0.0;
  o.C = 2.5;
  o.x_range = {0.5, 8.0};
  const auto mp = derive_monopoly(g, o);
  const Curve& b = *mp.bequest;
  double worst = 0.0;
  for (double x : numerics::linspace(0.5, 8.0, 97)) {
    worst = std::max(worst, std::abs(b.slope(x) - 2.5));
    worst = std::max(worst, std::abs((b(x) - b(0.5)) - 2.5 * (x - 0.5)));
  }
  return {worst <= 1e-10, "max deviation from slope C = " + num(worst)};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds, 0 when none is stated
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> cs = {
      {1, "Cobb-Douglas duopoly CI equals 0.25", 1.0, c1},
      {2, "zero CI on the alpha = beta line", 0.0, c2},
      {3, "no-externality CI = (N-1)/(N alpha)", 0.0, c3},
      {4, "identification identities", 0.0, c4},
      {5, "first-order identity", 0.0, c5},
      {6, "stationary MPNE equals x/6", 2.0, c6},
      {7, "MPNE solves the monopoly characteristic equation", 0.0, c7},
      {8, "finite-horizon transport relation", 5.0, c8},
      {9, "pricing payoff is a 0.75 power", 0.0, c9},
      {10, "non-rationalizability witness", 1.0, c10},
      {11, "eigen machinery", 0.0, c11},
      {12, "asymmetric duopoly symmetric limit", 0.0, c12},
      {13, "zero-discount bequest is affine", 0.0, c13},
  };
  return cs;
}

bool run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.budget > 0.0 && secs >= c.budget) {
    o.pass = false;
    o.detail += "; over the " + num(c.budget) + " s budget";
  }
  std::printf("%s #%d %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  bool ok = true;
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    for (const auto& c : criteria())
      if (c.id == id) return run_one(c) ? 0 : 1;
    std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
    return 2;
  }
  for (const auto& c : criteria()) ok = run_one(c) && ok;
  return ok ? 0 : 1;
}
