#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/scalar_function.hpp"

namespace oligo {

// own utility (1−α)⁻¹u^{1−α}, times v^{1−β} for every rival
struct CobbDouglas {
  double alpha = 0.5;
  double beta = 0.5;
};

// profit u·A·Q^{−q} − cost(u), Q total extraction
struct IsoelasticPricing {
  double A = 1.0;
  double q = 0.5;
  ScalarFunction cost = ScalarFunction::zero();
};

// own(u_i) + Σ_{j≠i} cross(u_j)
struct AdditiveSeparable {
  ScalarFunction own;
  ScalarFunction cross = ScalarFunction::zero();
};

struct PartialDerivatives {
  double L = 0.0;
  double L_own = 0.0;
  double L_cross = 0.0;      // w.r.t. one rival's rate
  double L_own_own = 0.0;
  double L_own_cross = 0.0;  // own rate and one rival's rate
};

// L(own, v, N): utility with every rival at the common rate v
struct Custom {
  std::function<double(double, double, int)> L;
  std::function<PartialDerivatives(double, double, int)> partials;  // optional
  std::string name = "custom";
};

using UtilityFamily = std::variant<CobbDouglas, IsoelasticPricing, AdditiveSeparable, Custom>;

struct InfiniteHorizon {};

struct FiniteHorizon {
  double T = 1.0;
  ScalarFunction bequest;
};

using Horizon = std::variant<InfiniteHorizon, FiniteHorizon>;

inline const Interval kDefaultRateDomain{1e-6, 1e6};

struct GameSpec {
  int N = 2;
  UtilityFamily utility = CobbDouglas{};
  double r = 0.05;
  Horizon horizon = InfiniteHorizon{};
  Interval rate_domain = kDefaultRateDomain;
  double x_max = 100.0;  // stock lives in (0, x_max]

  bool finite() const { return std::holds_alternative<FiniteHorizon>(horizon); }
  const FiniteHorizon& finite_horizon() const {
    if (!finite()) throw ParameterError("game has an infinite horizon");
    return std::get<FiniteHorizon>(horizon);
  }
};

inline std::string family_name(const UtilityFamily& u) {
  switch (u.index()) {
    case 0: return "cobb_douglas";
    case 1: return "isoelastic_pricing";
    case 2: return "additive_separable";
    default: return std::get<Custom>(u).name;
  }
}

inline void validate(const GameSpec& g) {
  if (g.N < 1) throw ParameterError("N must be at least 1");
  if (!(g.r >= 0.0) || !std::isfinite(g.r)) throw ParameterError("discount rate must be finite and nonnegative");
  if (!(g.rate_domain.lo > 0.0 && g.rate_domain.hi > g.rate_domain.lo)) {
    throw ParameterError("rate domain must satisfy 0 < u_min < u_max");
  }
  if (!(g.x_max > 0.0)) throw ParameterError("stock bound must be positive");
  if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    if (!(cd->alpha > 0.0 && cd->beta > 0.0)) throw ParameterError("Cobb-Douglas needs alpha > 0 and beta > 0");
  }
  if (const auto* ip = std::get_if<IsoelasticPricing>(&g.utility)) {
    if (!(ip->A > 0.0 && ip->q > 0.0)) throw ParameterError("isoelastic pricing needs A > 0 and q > 0");
  }
  if (const auto* c = std::get_if<Custom>(&g.utility)) {
    if (!c->L && !c->partials) throw ParameterError("custom utility has neither L nor partials");
  }
  if (g.finite() && !(g.finite_horizon().T > 0.0)) throw ParameterError("horizon T must be positive");
}

namespace detail {

inline void check_rate(double u, const Interval& dom, const char* what) {
  if (!(u >= dom.lo && u <= dom.hi)) {
    throw DomainError(std::string(what) + " rate " + std::to_string(u) + " outside [" + std::to_string(dom.lo) +
                          ", " + std::to_string(dom.hi) + "]",
                      u);
  }
}

inline PartialDerivatives cobb_douglas_partials(const CobbDouglas& p, int N, double own, double v) {
  const double a = p.alpha, b = p.beta;
  if (own == 0.0) throw SingularityError("Cobb-Douglas marginal utility has a pole at u = 0", own);
  if (a == 1.0) throw SingularityError("alpha = 1 makes (1-alpha)^-1 singular", own);
  PartialDerivatives d;
  const double rivals = N - 1;
  const double V = rivals > 0 ? std::pow(v, rivals * (1.0 - b)) : 1.0;
  d.L = std::pow(own, 1.0 - a) / (1.0 - a) * V;
  d.L_own = std::pow(own, -a) * V;
  d.L_own_own = -a * std::pow(own, -a - 1.0) * V;
  if (rivals > 0) {
    const double dv = (1.0 - b) * std::pow(v, -b + (rivals - 1.0) * (1.0 - b));
    d.L_cross = std::pow(own, 1.0 - a) / (1.0 - a) * dv;
    d.L_own_cross = std::pow(own, -a) * dv;
  }
  return d;
}

inline PartialDerivatives isoelastic_partials(const IsoelasticPricing& p, int N, double own, double v) {
  const double A = p.A, q = p.q;
  const double Q = own + (N - 1) * v;
  if (!(Q > 0.0)) throw SingularityError("inverse demand has a pole at zero total extraction", own);
  const double P = A * std::pow(Q, -q);
  const double P1 = -q * A * std::pow(Q, -q - 1.0);
  const double P2 = q * (q + 1.0) * A * std::pow(Q, -q - 2.0);
  PartialDerivatives d;
  d.L = own * P - p.cost(own);
  d.L_own = P + own * P1 - p.cost.d1(own);
  d.L_own_own = 2.0 * P1 + own * P2 - p.cost.d2(own);
  if (N > 1) {
    d.L_cross = own * P1;
    d.L_own_cross = P1 + own * P2;
  }
  return d;
}

inline PartialDerivatives additive_partials(const AdditiveSeparable& p, int N, double own, double v) {
  PartialDerivatives d;
  d.L = p.own(own) + (N - 1) * p.cross(v);
  d.L_own = p.own.d1(own);
  d.L_own_own = p.own.d2(own);
  if (N > 1) d.L_cross = p.cross.d1(v);
  return d;
}

inline PartialDerivatives custom_partials(const Custom& c, int N, double own, double v) {
  if (c.partials) return c.partials(own, v, N);
  const double eps = std::numeric_limits<double>::epsilon();
  // first derivatives: cube-root step; second: fourth-root step
  auto step = [&](double u, double base) {
    double h = base * std::max(1.0, std::abs(u));
    return std::min(h, 0.5 * std::abs(u));
  };
  const double h1 = step(own, std::cbrt(eps));
  const double h2 = step(own, std::pow(eps, 0.25));
  const auto& L = c.L;
  PartialDerivatives d;
  d.L = L(own, v, N);
  d.L_own = (L(own + h1, v, N) - L(own - h1, v, N)) / (2.0 * h1);
  d.L_own_own = (L(own + h2, v, N) - 2.0 * d.L + L(own - h2, v, N)) / (h2 * h2);
  if (N > 1) {
    const double k1 = step(v, std::cbrt(eps));
    const double k2 = step(v, std::pow(eps, 0.25));
    d.L_cross = (L(own, v + k1, N) - L(own, v - k1, N)) / (2.0 * k1) / (N - 1);
    d.L_own_cross = (L(own + h2, v + k2, N) - L(own + h2, v - k2, N) - L(own - h2, v + k2, N) +
                     L(own - h2, v - k2, N)) /
                    (4.0 * h2 * k2) / (N - 1);
  }
  return d;
}

}  // namespace detail

/// L and its partials with every rival at the common rate `other`.
inline PartialDerivatives partials(const UtilityFamily& utility, int N, double own, double other,
                                   const Interval& domain = kDefaultRateDomain) {
  detail::check_rate(own, domain, "own");
  if (N > 1) detail::check_rate(other, domain, "rival");
  PartialDerivatives d = std::visit(
      [&](const auto& fam) -> PartialDerivatives {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, CobbDouglas>) return detail::cobb_douglas_partials(fam, N, own, other);
        else if constexpr (std::is_same_v<T, IsoelasticPricing>) return detail::isoelastic_partials(fam, N, own, other);
        else if constexpr (std::is_same_v<T, AdditiveSeparable>) return detail::additive_partials(fam, N, own, other);
        else return detail::custom_partials(fam, N, own, other);
      },
      utility);
  if (!std::isfinite(d.L_own) || !std::isfinite(d.L_own_own) || !std::isfinite(d.L_own_cross) ||
      !std::isfinite(d.L_cross)) {
    throw SingularityError("utility derivatives are not finite at u = " + std::to_string(own), own);
  }
  return d;
}

namespace detail {

inline double symmetric_denominator(const PartialDerivatives& d, int N) {
  return d.L_own_own + (N - 1) * d.L_own_cross;
}

}  // namespace detail

/// e1(u) = −L_own / (L_own_own + (N−1)·L_own_cross) on the diagonal.
inline double risk_index_own(const GameSpec& g, double u) {
  const auto d = partials(g.utility, g.N, u, u, g.rate_domain);
  const double den = detail::symmetric_denominator(d, g.N);
  if (den == 0.0) throw SingularityError("risk index denominator vanishes", u);
  const double e = -d.L_own / den;
  if (!(e > 0.0)) throw SignError("own risk index e1 = " + std::to_string(e) + " is not positive", u);
  return e;
}

/// e_{-1}(u) = −L_cross / (L_own_own + (N−1)·L_own_cross); zero for a monopoly.
inline double risk_index_cross(const GameSpec& g, double u) {
  if (g.N == 1) return 0.0;
  const auto d = partials(g.utility, g.N, u, u, g.rate_domain);
  const double den = detail::symmetric_denominator(d, g.N);
  if (den == 0.0) throw SingularityError("risk index denominator vanishes", u);
  return -d.L_cross / den;
}

struct RiskProfile {
  Curve e1;
  Curve e_minus_1;
  Interval domain;
  // set when both indices are exactly linear, e = η·u
  std::optional<double> eta1;
  std::optional<double> eta2;
  double tabulation_error = 0.0;  // achieved relative interpolation error (tabulated profiles)

  bool linear() const { return eta1.has_value() && eta2.has_value(); }
};

namespace detail {

inline RiskProfile linear_profile(double eta1, double eta2, const Interval& dom) {
  if (!(eta1 > 0.0)) throw SignError("own risk index slope " + std::to_string(eta1) + " is not positive", dom.lo);
  RiskProfile p;
  p.e1 = Curve::affine(eta1, 0.0, dom);
  p.e_minus_1 = Curve::affine(eta2, 0.0, dom);
  p.domain = dom;
  p.eta1 = eta1;
  p.eta2 = eta2;
  return p;
}

// Spline through e(u) on a log grid, refined where the midpoint error exceeds `tol` relative.
// Finite-difference partials carry ~1e-8 noise, so tighter targets only add knots.
inline std::pair<Curve, double> adaptive_table(const std::function<double(double)>& e, const Interval& dom,
                                               std::size_t max_nodes = 4096, double tol = 1e-7) {
  const double decades = std::log10(dom.hi / dom.lo);
  auto xs = numerics::logspace(dom.lo, dom.hi, std::max<std::size_t>(8, static_cast<std::size_t>(8 * decades) + 1));
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = e(xs[i]);
  double worst = 0.0;
  for (int round = 0; round < 40; ++round) {
    const Curve c = Curve::spline(xs, ys);
    std::vector<double> nx, ny;
    worst = 0.0;
    bool refined = false;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      nx.push_back(xs[i]);
      ny.push_back(ys[i]);
      const double xm = std::sqrt(xs[i] * xs[i + 1]);
      const double ym = e(xm);
      const double err = std::abs(c(xm) - ym) / std::max(std::abs(ym), 1e-300);
      worst = std::max(worst, err);
      if (err > tol && xs.size() + nx.size() < 2 * max_nodes) {
        nx.push_back(xm);
        ny.push_back(ym);
        refined = true;
      }
    }
    nx.push_back(xs.back());
    ny.push_back(ys.back());
    if (!refined || nx.size() > max_nodes) break;
    xs = std::move(nx);
    ys = std::move(ny);
  }
  return {Curve::spline(xs, ys), worst};
}

}  // namespace detail

/// The diagonal index curves e1, e_{-1} for a symmetric game.
inline RiskProfile symmetric_reduce(const GameSpec& g) {
  validate(g);
  const Interval dom = g.rate_domain;
  const int N = g.N;
  if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    const double a = cd->alpha, b = cd->beta;
    const double k = -a + (N - 1) * (1.0 - b);
    if (k == 0.0) throw SingularityError("-alpha + (N-1)(1-beta) vanishes", dom.lo);
    if (N > 1 && a == 1.0) throw SingularityError("alpha = 1 makes the cross index singular", dom.lo);
    const double eta1 = -1.0 / k;
    const double eta2 = N > 1 ? -((1.0 - b) / (1.0 - a)) / k : 0.0;
    return detail::linear_profile(eta1, eta2, dom);
  }
  if (const auto* ip = std::get_if<IsoelasticPricing>(&g.utility); ip && ip->cost.is_zero()) {
    if (N > 1 && ip->q == static_cast<double>(N)) throw SingularityError("q = N makes the risk indices singular", dom.lo);
    const double eta1 = 1.0 / ip->q;
    const double eta2 = N > 1 ? 1.0 / (ip->q - N) : 0.0;
    return detail::linear_profile(eta1, eta2, dom);
  }
  auto e1 = [g](double u) { return risk_index_own(g, u); };
  auto em1 = [g](double u) { return risk_index_cross(g, u); };
  RiskProfile p;
  p.domain = dom;
  if (std::holds_alternative<Custom>(g.utility)) {
    auto [c1, err1] = detail::adaptive_table(e1, dom);
    p.e1 = c1;
    if (N == 1) {
      p.e_minus_1 = Curve::constant(0.0, dom);
      p.tabulation_error = err1;
    } else {
      auto [c2, err2] = detail::adaptive_table(em1, dom);
      p.e_minus_1 = c2;
      p.tabulation_error = std::max(err1, err2);
    }
    return p;
  }
  p.e1 = Curve::closed_form("risk_own", {}, dom, e1);
  if (N == 1) {
    p.e_minus_1 = Curve::constant(0.0, dom);
  } else if (const auto* ad = std::get_if<AdditiveSeparable>(&g.utility); ad && ad->cross.is_zero()) {
    p.e_minus_1 = Curve::constant(0.0, dom);
  } else {
    p.e_minus_1 = Curve::closed_form("risk_cross", {}, dom, em1);
  }
  return p;
}

}  // namespace oligo
