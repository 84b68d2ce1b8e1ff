#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/numerics/finite_difference.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/numerics/quadrature.hpp"
#include "oligo/numerics/roots.hpp"

namespace oligo {

/// φ(x): the common rate at the terminal time, solving L_own(φ,…,φ) = B_x(x).
struct TerminalMap {
  std::vector<double> grid;
  Curve phi;  // Hermite through the grid with exact slopes
  bool invertible = false;
  std::function<double(double)> exact;        // root solve at any stock
  std::function<double(double)> exact_slope;  // implicit derivative

  double value(double x) const { return exact(x); }
  double slope(double x) const { return exact_slope(x); }
};

struct MonopolyProblem {
  Curve ell;
  double rho = 0.0;
  Curve f;
  std::optional<Curve> bequest;
  double C = 1.0;
  Curve gamma;
  double u_ref = 1.0;

  double r = 0.0;
  int N = 1;
  std::optional<double> m;    // γ ∝ u^{−m} on the closed-form path
  std::optional<double> k_f;  // f = k_f·u on the closed-form path
  Provenance provenance = Provenance::analytic;
  Interval work_range{0.1, 10.0};
  std::optional<TerminalMap> terminal;
  std::vector<std::string> notes;
};

struct DeriveOptions {
  std::optional<double> rho;  // default: r
  std::optional<double> C;    // default: +1, flipped so ℓ increases at mid work range
  double u_ref = 1.0;
  Interval work_range{0.1, 10.0};
  Interval x_range{0.1, 10.0};  // stock grid for the terminal map and bequest
  std::size_t x_points = 101;
  bool force_quadrature = false;  // skip the linear closed forms
  bool validate = true;
  numerics::QuadratureOptions quad{};
};

/// f(u) = −N·u + (N−1)·(e1(u) − e_{-1}(u)).
inline Curve fictitious_dynamics(const RiskProfile& p, int N, bool allow_closed_form = true) {
  if (allow_closed_form && p.linear()) {
    const double k = -N + (N - 1) * (*p.eta1 - *p.eta2);
    return Curve::affine(k, 0.0, p.domain);
  }
  const Curve e1 = p.e1, em1 = p.e_minus_1;
  return Curve::closed_form(
      "dynamics", {{"N", N}}, p.domain, [=](double u) { return -N * u + (N - 1) * (e1(u) - em1(u)); },
      [=](double u) { return -N + (N - 1) * (e1.slope(u) - em1.slope(u)); }, {},
      p.e1.provenance() == Provenance::analytic ? Provenance::analytic : Provenance::interpolated);
}

namespace detail {

inline void check_discounts(double rho, double r) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be finite and nonnegative");
  if (rho > 0.0 && !(r > 0.0)) throw ParameterError("rho > 0 needs a positive game discount r");
}

}  // namespace detail

/// γ(u) = C·exp(−(ρ/r)∫_{u_ref}^u dz/e1(z)).
inline Curve coestate_gamma(const RiskProfile& p, double rho, double r, double C, double u_ref,
                            bool allow_closed_form = true, const numerics::QuadratureOptions& q = {}) {
  detail::check_discounts(rho, r);
  if (C == 0.0) throw ParameterError("integration constant C must be nonzero");
  if (rho == 0.0) return Curve::constant(C, p.domain);
  const double ratio = rho / r;
  if (allow_closed_form && p.linear()) {
    const double m = ratio / *p.eta1;
    Curve g = Curve::closed_form(
        "power", {{"C", C}, {"m", m}, {"u_ref", u_ref}}, p.domain,
        [=](double u) { return C * std::pow(u / u_ref, -m); },
        [=](double u) { return -m * C * std::pow(u / u_ref, -m) / u; },
        [=](double u) { return m * (m + 1.0) * C * std::pow(u / u_ref, -m) / (u * u); });
    return g;
  }
  const Curve e1 = p.e1;
  auto value = [=](double u) {
    const double I = numerics::integral([&](double z) { return 1.0 / e1(z); }, u_ref, u, q);
    return C * std::exp(-ratio * I);
  };
  auto slope = [=](double u) { return -ratio * value(u) / e1(u); };
  return Curve::closed_form("coestate", {{"C", C}, {"rho", rho}, {"r", r}, {"u_ref", u_ref}}, p.domain, value, slope,
                            {}, Provenance::quadrature);
}

/// ℓ(u) = −f(u)·γ(u) − (ρ/r)∫_{u_ref}^u f(z)γ(z)/e1(z) dz, so that ℓ′ = −f′·γ.
/// `log_ok` allows the logarithmic closed form when the power exponent is 1.
inline Curve fictitious_payoff(const RiskProfile& p, const Curve& f, const Curve& gamma, double rho, double r, double C,
                               double u_ref, bool allow_closed_form = true, bool log_ok = true,
                               const numerics::QuadratureOptions& q = {}) {
  detail::check_discounts(rho, r);
  if (rho == 0.0) {
    const Curve ff = f;
    return Curve::closed_form(
        "scaled_dynamics", {{"C", C}}, p.domain, [=](double u) { return -C * ff(u); },
        [=](double u) { return -C * ff.slope(u); }, [=](double u) { return -C * ff.second(u); }, f.provenance());
  }
  const auto kf = f.param("k");
  if (allow_closed_form && p.linear() && f.tag() == "affine" && kf && gamma.tag() == "power") {
    const double k = *kf;
    const double m = rho / (r * *p.eta1);
    const double base = k * C * std::pow(u_ref, m);
    if (std::abs(m - 1.0) < 1e-14) {
      if (!log_ok) throw SingularPayoffError("payoff exponent 1 - m vanishes (logarithmic case)", u_ref);
      return Curve::closed_form(
          "log", {{"k_f", k}, {"C", C}, {"u_ref", u_ref}}, p.domain,
          [=](double u) { return -k * C * u_ref * (1.0 + std::log(u / u_ref)); },
          [=](double u) { return -k * C * u_ref / u; }, [=](double u) { return k * C * u_ref / (u * u); });
    }
    return Curve::closed_form(
        "power", {{"k_f", k}, {"C", C}, {"m", m}, {"u_ref", u_ref}}, p.domain,
        [=](double u) { return -base * (std::pow(u, 1.0 - m) - m * std::pow(u_ref, 1.0 - m)) / (1.0 - m); },
        [=](double u) { return -base * std::pow(u, -m); },
        [=](double u) { return m * base * std::pow(u, -m - 1.0); });
  }
  const double ratio = rho / r;
  const Curve e1 = p.e1, ff = f, g = gamma;
  auto value = [=](double u) {
    const double I = numerics::integral([&](double z) { return ff(z) * g(z) / e1(z); }, u_ref, u, q);
    return -ff(u) * g(u) - ratio * I;
  };
  auto slope = [=](double u) { return -ff.slope(u) * g(u); };
  auto second = [=](double u) { return -ff.second(u) * g(u) - ff.slope(u) * g.slope(u); };
  return Curve::closed_form("payoff", {{"C", C}, {"rho", rho}, {"r", r}, {"u_ref", u_ref}}, p.domain, value, slope,
                            second, Provenance::quadrature);
}

/// CI = ((N−1)/N)·(e1(u) − e_{-1}(u))/u.
inline double competition_index(const RiskProfile& p, int N, double u) {
  if (!(u > 0.0)) throw DomainError("competition index needs u > 0", u);
  if (!p.domain.contains(u)) throw DomainError("u outside the profile domain", u);
  if (N == 1) return 0.0;
  return (static_cast<double>(N - 1) / N) * (p.e1(u) - p.e_minus_1(u)) / u;
}

/// Solves L_own(φ,…,φ) = B_x(x) on each stock of `x_grid`.
inline TerminalMap terminal_strategy(const GameSpec& g, std::vector<double> x_grid) {
  const auto& fh = g.finite_horizon();
  if (x_grid.size() < 2 || !numerics::strictly_increasing(x_grid)) {
    throw ValueError("terminal stock grid must be strictly increasing with at least two nodes");
  }
  const Interval dom = g.rate_domain;
  const auto utility = g.utility;
  const int N = g.N;
  auto marginal = [=](double u) { return partials(utility, N, u, u, dom).L_own; };
  auto marginal_slope = [=](double u) {
    const auto d = partials(utility, N, u, u, dom);
    return d.L_own_own + (N - 1) * d.L_own_cross;
  };

  // L_own on the diagonal must be strictly monotone for φ to be unique
  const auto probe = numerics::logspace(dom.lo, dom.hi, 400);
  int direction = 0;
  double prev = marginal(probe[0]);
  for (std::size_t i = 1; i < probe.size(); ++i) {
    const double cur = marginal(probe[i]);
    const int s = cur > prev ? 1 : (cur < prev ? -1 : 0);
    if (s == 0 || (direction != 0 && s != direction)) {
      throw NonUniqueError("marginal utility on the diagonal is not strictly monotone", probe[i]);
    }
    direction = s;
    prev = cur;
  }

  const ScalarFunction B = fh.bequest;
  auto exact = [=](double x) {
    const double target = B.d1(x);
    auto h = [&](double u) { return marginal(u) - target; };
    const double flo = h(dom.lo), fhi = h(dom.hi);
    if ((flo > 0.0) == (fhi > 0.0)) {
      throw NoRootError("no terminal rate in the rate domain matches B_x(" + std::to_string(x) + ")", x);
    }
    // Newton in log u keeps iterates positive across decades
    auto hl = [&](double s) { return h(std::exp(s)); };
    auto dhl = [&](double s) { return marginal_slope(std::exp(s)) * std::exp(s); };
    const double s = numerics::newton_bisect(hl, dhl, std::log(dom.lo), std::log(dom.hi), 0.0, {1e-15, 1e-15, 400});
    return std::exp(s);
  };
  auto exact_slope = [=](double x) {
    const double u = exact(x);
    const double den = marginal_slope(u);
    if (den == 0.0) throw SingularityError("terminal map slope is singular", x);
    return B.d2(x) / den;
  };

  TerminalMap tm;
  tm.grid = x_grid;
  std::vector<double> y(x_grid.size()), dy(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    y[i] = exact(x_grid[i]);
    const double den = marginal_slope(y[i]);
    if (den == 0.0) throw SingularityError("terminal map slope is singular", x_grid[i]);
    dy[i] = B.d2(x_grid[i]) / den;
  }
  bool up = true, down = true;
  for (std::size_t i = 1; i < y.size(); ++i) {
    up = up && y[i] > y[i - 1];
    down = down && y[i] < y[i - 1];
  }
  tm.invertible = up || down;
  tm.phi = Curve::hermite(x_grid, y, dy, Provenance::quadrature);
  tm.exact = exact;
  tm.exact_slope = exact_slope;
  return tm;
}

/// b(x) = ∫_{x_ref}^x b_x, with b_x(x) = C·exp(−(ρ/r)(∫_{u_ref}^{φ(x_ref)} du/e1 + ∫_{x_ref}^x φ_x/e1(φ) dz)),
/// i.e. b_x = γ(φ(x)). The inner antiderivative is tabulated once on the grid.
inline Curve fictitious_bequest(const TerminalMap& phi, const RiskProfile& p, double rho, double r, double C,
                                double u_ref = 1.0, const numerics::QuadratureOptions& q = {}) {
  detail::check_discounts(rho, r);
  const auto& xs = phi.grid;
  const double x_ref = xs.front();
  const Interval dom{xs.front(), xs.back()};
  if (rho == 0.0) return Curve::affine(C, -C * x_ref, dom);

  const double ratio = rho / r;
  const Curve e1 = p.e1;
  auto inner_integrand = [&](double z) {
    const double u = phi.value(z);
    if (!p.domain.contains(u)) throw DomainError("terminal rate left the profile domain", z);
    return phi.slope(z) / e1(u);
  };
  const double offset = numerics::integral([&](double u) { return 1.0 / e1(u); }, u_ref, phi.value(x_ref), q);
  const auto I = numerics::cumulative_integral(inner_integrand, xs, q);
  std::vector<double> dI(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dI[i] = inner_integrand(xs[i]);
  const Curve inner = Curve::hermite(xs, I, dI, Provenance::quadrature);

  auto bx = [&](double x) { return C * std::exp(-ratio * (offset + inner(x))); };
  const auto b = numerics::cumulative_integral(bx, xs, q);
  std::vector<double> db(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) db[i] = C * std::exp(-ratio * (offset + I[i]));
  return Curve::hermite(xs, b, db, Provenance::quadrature);
}

/// sup over a grid of |ρ·γ/γ′ + r·e1|, with γ′ by finite differences. With ρ = 0
/// the ratio is 0/0 and the cross-multiplied defect |r·e1·γ′/γ| is reported.
inline double identification_defect_gamma(const RiskProfile& p, const Curve& gamma, double rho, double r,
                                          const std::vector<double>& us) {
  double worst = 0.0;
  const Interval dom = gamma.domain();
  for (double u : us) {
    const double dg = numerics::fd_derivative([&](double z) { return gamma(z); }, u, dom.lo, dom.hi);
    const double gv = gamma(u);
    double d;
    if (rho == 0.0) {
      d = std::abs(r * p.e1(u) * dg / gv);
    } else {
      if (dg == 0.0) throw SingularityError("coestate derivative vanishes", u);
      d = std::abs(rho * gv / dg + r * p.e1(u));
    }
    worst = std::max(worst, d);
  }
  return worst;
}

inline double identification_defect_dynamics(const RiskProfile& p, const Curve& f, int N,
                                             const std::vector<double>& us) {
  double worst = 0.0;
  for (double u : us) {
    const double target = -N * u + (N - 1) * (p.e1(u) - p.e_minus_1(u));
    worst = std::max(worst, std::abs(f(u) - target));
  }
  return worst;
}

/// sup relative |ℓ′ + f′·γ| with ℓ′ from 4th-order differences of ℓ.
inline double foc_defect(const Curve& ell, const Curve& f, const Curve& gamma, const std::vector<double>& us) {
  double worst = 0.0;
  const Interval dom = ell.domain();
  for (double u : us) {
    const double dl = numerics::fd_derivative([&](double z) { return ell(z); }, u, dom.lo, dom.hi);
    const double rhs = f.slope(u) * gamma(u);
    const double scale = std::max(std::abs(rhs), 1e-300);
    worst = std::max(worst, std::abs(dl + rhs) / scale);
  }
  return worst;
}

/// Builds the fictitious monopoly (ℓ, ρ, f, b) for a symmetric game.
inline MonopolyProblem derive_monopoly(const GameSpec& g, const DeriveOptions& o = {}) {
  validate(g);
  MonopolyProblem mp;
  mp.N = g.N;
  mp.r = g.r;
  mp.u_ref = o.u_ref;
  mp.work_range = o.work_range;
  mp.rho = o.rho.value_or(g.r);
  if (!g.finite() && !(mp.rho > 0.0)) throw ParameterError("an infinite-horizon game needs rho > 0");
  if (!g.rate_domain.contains(o.u_ref)) throw DomainError("u_ref outside the rate domain", o.u_ref);

  const RiskProfile prof = in_stage("symmetric_reduce", [&] { return symmetric_reduce(g); });
  const bool closed = !o.force_quadrature && prof.linear();
  mp.f = in_stage("fictitious_dynamics", [&] { return fictitious_dynamics(prof, g.N, closed); });

  if (o.C) {
    mp.C = *o.C;
  } else {
    mp.C = 1.0;
    const double mid = o.work_range.mid();
    if (mp.f.slope(mid) > 0.0) {
      mp.C = -1.0;
      mp.notes.push_back("C flipped to -1 so that the payoff increases at u = " + std::to_string(mid));
    }
  }

  mp.gamma = in_stage("coestate_gamma",
                      [&] { return coestate_gamma(prof, mp.rho, g.r, mp.C, o.u_ref, closed, o.quad); });
  const bool log_ok = !std::holds_alternative<IsoelasticPricing>(g.utility);
  mp.ell = in_stage("fictitious_payoff", [&] {
    return fictitious_payoff(prof, mp.f, mp.gamma, mp.rho, g.r, mp.C, o.u_ref, closed, log_ok, o.quad);
  });
  if (closed) {
    mp.k_f = *mp.f.param("k");
    mp.m = mp.rho > 0.0 ? mp.rho / (g.r * *prof.eta1) : 0.0;
    mp.provenance = Provenance::analytic;
  } else {
    mp.provenance = prof.e1.provenance() == Provenance::interpolated ? Provenance::interpolated
                                                                      : (mp.rho > 0.0 ? Provenance::quadrature
                                                                                      : Provenance::analytic);
  }

  if (g.finite()) {
    const double hi = std::min(o.x_range.hi, g.x_max);
    if (!(hi > o.x_range.lo && o.x_range.lo > 0.0)) throw ParameterError("stock grid range is empty");
    auto xs = numerics::linspace(o.x_range.lo, hi, std::max<std::size_t>(o.x_points, 2));
    mp.terminal = in_stage("terminal_strategy", [&] { return terminal_strategy(g, xs); });
    mp.bequest = in_stage("fictitious_bequest", [&] {
      return fictitious_bequest(*mp.terminal, prof, mp.rho, g.r, mp.C, o.u_ref, o.quad);
    });
  }

  if (o.validate) {
    in_stage("validate", [&] {
      const auto us = numerics::logspace(o.work_range.lo, o.work_range.hi, 50);
      const double tol_id = mp.provenance == Provenance::analytic ? 1e-8 : 1e-5;
      const double dg = identification_defect_gamma(prof, mp.gamma, mp.rho, g.r, us);
      const double df = identification_defect_dynamics(prof, mp.f, g.N, us);
      if (dg > tol_id || df > tol_id) {
        throw ValueError("identification identities fail (gamma " + std::to_string(dg) + ", f " +
                         std::to_string(df) + ")");
      }
      std::vector<double> inner(us.begin() + 15, us.begin() + 35);
      const double foc = foc_defect(mp.ell, mp.f, mp.gamma, inner);
      const double tol_foc = mp.provenance == Provenance::interpolated ? 1e-4 : 1e-6;
      if (foc > tol_foc) throw ValueError("first-order identity fails (" + std::to_string(foc) + ")");
      return 0;
    });
  }
  return mp;
}

}  // namespace oligo
