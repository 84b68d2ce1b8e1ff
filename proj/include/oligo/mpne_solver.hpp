#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/numerics/finite_difference.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/numerics/ode.hpp"
#include "oligo/numerics/quadrature.hpp"
#include "oligo/numerics/roots.hpp"
#include "oligo/symmetric_equiv.hpp"

namespace oligo {

struct StationaryStrategy {
  Curve u_of_x;
};

struct TimeDependentStrategy {
  std::vector<double> t;               // ascending
  std::vector<double> x;               // ascending
  std::vector<std::vector<double>> u;  // u[i][j] at (t[i], x[j])

  // bilinear between nodes
  double at(double tt, double xx) const {
    if (tt < t.front() || tt > t.back() || xx < x.front() || xx > x.back()) {
      throw DomainError("strategy evaluated outside its (t, x) grid", xx);
    }
    auto cell = [](const std::vector<double>& g, double v) {
      auto it = std::upper_bound(g.begin(), g.end(), v);
      std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
      return std::min(i, g.size() - 2);
    };
    if (t.size() == 1) {
      const std::size_t j = cell(x, xx);
      const double w = (xx - x[j]) / (x[j + 1] - x[j]);
      return (1 - w) * u[0][j] + w * u[0][j + 1];
    }
    const std::size_t i = cell(t, tt), j = cell(x, xx);
    const double a = (tt - t[i]) / (t[i + 1] - t[i]);
    const double b = (xx - x[j]) / (x[j + 1] - x[j]);
    return (1 - a) * ((1 - b) * u[i][j] + b * u[i][j + 1]) + a * ((1 - b) * u[i + 1][j] + b * u[i + 1][j + 1]);
  }
};

struct FeedbackStrategy {
  std::variant<StationaryStrategy, TimeDependentStrategy> kind;
  std::string provenance;  // ansatz | ODE | characteristics

  bool stationary() const { return std::holds_alternative<StationaryStrategy>(kind); }
  const Curve& curve() const { return std::get<StationaryStrategy>(kind).u_of_x; }
  const TimeDependentStrategy& grid() const { return std::get<TimeDependentStrategy>(kind); }
};

struct StationaryOptions {
  std::optional<double> seed_rate;  // used when r = 0
  Interval slope_bracket{1e-4, 1e4};
  numerics::OdeOptions ode{};
  numerics::QuadratureOptions quad{};
};

namespace detail {

inline std::function<double(double)> advection(const RiskProfile& p, int N) {
  const Curve e1 = p.e1, em1 = p.e_minus_1;
  return [=](double u) { return -N * u + (N - 1) * (e1(u) - em1(u)); };
}

inline void check_grid(const std::vector<double>& g, const char* what) {
  if (g.size() < 2 || !numerics::strictly_increasing(g)) {
    throw ValueError(std::string(what) + " grid must be strictly increasing with at least two nodes");
  }
}

}  // namespace detail

/// Stationary feedback u(x) solving a(u)·u′ = −r·e1(u), a(u) = −N·u + (N−1)(e1 − e_{-1}),
/// integrated forward from the first positive stock with u(0) = 0 in the closure.
inline FeedbackStrategy stationary_mpne(const GameSpec& g, const RiskProfile& p, const std::vector<double>& x_grid,
                                        const StationaryOptions& o = {}) {
  if (g.finite()) throw ParameterError("stationary MPNE needs an infinite horizon");
  detail::check_grid(x_grid, "stock");
  if (x_grid.front() < 0.0) throw DomainError("stock grid has negative entries", x_grid.front());
  const bool has_zero = x_grid.front() == 0.0;
  std::vector<double> xs(x_grid.begin() + (has_zero ? 1 : 0), x_grid.end());
  if (xs.size() < 2) throw ValueError("stock grid needs two positive nodes");
  const double x0 = xs.front();
  const Interval dom = p.domain;
  const auto a = detail::advection(p, g.N);
  const Curve e1 = p.e1;
  const double r = g.r;

  if (r == 0.0) {
    if (!o.seed_rate) throw ParameterError("r = 0 leaves u constant; supply a seed rate");
    FeedbackStrategy s{StationaryStrategy{Curve::constant(*o.seed_rate, {x_grid.front(), x_grid.back()})}, "ansatz"};
    return s;
  }

  double u0 = 0.0;
  double lin_slope = std::numeric_limits<double>::quiet_NaN();
  if (p.linear()) {
    const double kf = -g.N + (g.N - 1) * (*p.eta1 - *p.eta2);
    if (kf == 0.0) throw StallError("advection coefficient vanishes identically", x0);
    lin_slope = -r * *p.eta1 / kf;
    if (!(lin_slope > 0.0)) {
      throw BlowUpError("linear feedback slope " + std::to_string(lin_slope) + " would make rates negative", x0);
    }
    u0 = lin_slope * x0;
  } else {
    // stock needed to reach rate u from u(0) = 0: X(u) = ∫ −a/(r e1)
    auto X = [&](double u) {
      return numerics::integral([&](double z) { return -a(z) / (r * e1(z)); }, dom.lo, u, o.quad);
    };
    auto mismatch = [&](double s) {
      const double u = s * x0;
      if (u <= dom.lo || u >= dom.hi) return u <= dom.lo ? -x0 : x0;
      return X(u) - x0;
    };
    const double s = numerics::bisect(mismatch, o.slope_bracket.lo, o.slope_bracket.hi, {1e-13, 1e-300, 400});
    u0 = s * x0;
  }
  if (!dom.contains(u0)) throw BlowUpError("seed rate outside the rate domain", x0);

  auto rhs = [&](double x, const numerics::State<1>& y) -> numerics::State<1> {
    const double u = y[0];
    if (!(u > dom.lo && u < dom.hi)) throw BlowUpError("rate left the domain at stock " + std::to_string(x), x);
    const double av = a(u);
    const double scale = std::abs(g.N * u) + 1e-300;
    if (std::abs(av) <= 1e-12 * scale) throw StallError("advection coefficient vanishes at u = " + std::to_string(u), x);
    return {-r * e1(u) / av};
  };
  auto guard = [&](double x, const numerics::State<1>& y) {
    if (!std::isfinite(y[0]) || !(y[0] > dom.lo && y[0] < dom.hi)) {
      throw BlowUpError("rate left the domain at stock " + std::to_string(x), x);
    }
  };
  auto traj = numerics::dopri5<1>(rhs, x0, {u0}, xs, o.ode, guard);

  std::vector<double> X = xs, U(xs.size()), dU(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    U[i] = traj.y[i][0];
    dU[i] = traj.dy[i][0];
  }
  if (has_zero) {
    X.insert(X.begin(), 0.0);
    U.insert(U.begin(), 0.0);
    dU.insert(dU.begin(), std::isfinite(lin_slope) ? lin_slope : U[1] / X[1]);
  }
  return {StationaryStrategy{Curve::hermite(X, U, dU, Provenance::quadrature)}, "ODE"};
}

struct CharacteristicsOptions {
  numerics::OdeOptions ode{};
  double root_rtol = 1e-14;
};

/// Backward characteristics for u_t + a(u)·u_x = −r·e1(u) with u(T, x) = φ(x).
/// Launches from the terminal map's grid; each output node is located in the
/// foot-point bracket and refined by re-integrating a single characteristic.
inline FeedbackStrategy characteristics_mpne(const GameSpec& g, const RiskProfile& p, const TerminalMap& phi,
                                             std::vector<double> ts, std::vector<double> xs,
                                             const CharacteristicsOptions& o = {}) {
  const double T = g.finite_horizon().T;
  detail::check_grid(xs, "stock");
  if (ts.empty()) throw ValueError("time grid is empty");
  if (ts.size() > 1) detail::check_grid(ts, "time");
  if (ts.front() < 0.0 || ts.back() > T) throw DomainError("time grid must lie in [0, T]", ts.back());
  const Interval dom = p.domain;
  const auto a = detail::advection(p, g.N);
  const Curve e1 = p.e1;
  const double r = g.r;

  // backward time s = T − t; outputs ordered by increasing s
  std::vector<double> svals;
  for (auto it = ts.rbegin(); it != ts.rend(); ++it) svals.push_back(T - *it);

  auto rhs = [&](double, const numerics::State<2>& y) -> numerics::State<2> {
    return {-a(y[1]), r * e1(y[1])};
  };
  auto guard = [&](double s, const numerics::State<2>& y) {
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !(y[1] > dom.lo && y[1] < dom.hi)) {
      throw BlowUpError("characteristic rate left the domain", T - s);
    }
  };
  auto launch = [&](double xi, std::span<const double> outs) {
    const double u = phi.value(xi);
    return numerics::dopri5<2>(rhs, 0.0, {xi, u}, outs, o.ode, guard);
  };

  const auto& feet = phi.grid;
  const std::size_t nl = feet.size();
  std::vector<numerics::OdeTrajectory<2>> traj(nl);
  for (std::size_t j = 0; j < nl; ++j) traj[j] = launch(feet[j], svals);

  TimeDependentStrategy out;
  out.t = ts;
  out.x = xs;
  out.u.assign(ts.size(), std::vector<double>(xs.size(), 0.0));

  for (std::size_t k = 0; k < svals.size(); ++k) {
    const std::size_t ti = ts.size() - 1 - k;
    const double s = svals[k];
    std::vector<double> pos(nl);
    for (std::size_t j = 0; j < nl; ++j) pos[j] = traj[j].y[k][0];
    for (std::size_t j = 1; j < nl; ++j) {
      if (!(pos[j] > pos[j - 1])) {
        throw ShockError("characteristics cross before t = " + std::to_string(ts[ti]) +
                             "; no classical solution on this window",
                         ts[ti]);
      }
    }
    for (std::size_t m = 0; m < xs.size(); ++m) {
      const double x = xs[m];
      if (s == 0.0) {
        out.u[ti][m] = phi.value(x);
        continue;
      }
      if (x < pos.front() || x > pos.back()) {
        throw DomainError("stock " + std::to_string(x) + " at t = " + std::to_string(ts[ti]) +
                              " is not reached by any characteristic",
                          x);
      }
      auto it = std::upper_bound(pos.begin(), pos.end(), x);
      std::size_t j = it == pos.begin() ? 0 : static_cast<std::size_t>(it - pos.begin()) - 1;
      j = std::min(j, nl - 2);
      if (pos[j] == x) {
        out.u[ti][m] = traj[j].y[k][1];
        continue;
      }
      if (pos[j + 1] == x) {
        out.u[ti][m] = traj[j + 1].y[k][1];
        continue;
      }
      const double single[1] = {s};
      auto foot = [&](double xi) { return launch(xi, std::span<const double>(single, 1)).y[0][0] - x; };
      // a lone re-integration takes different steps than the batch, so the bracket may need one more node
      std::size_t lo = j, hi = j + 1;
      if (foot(feet[lo]) * foot(feet[hi]) > 0.0) {
        lo = j > 0 ? j - 1 : j;
        hi = std::min(j + 2, nl - 1);
      }
      const double xi = numerics::brent(foot, feet[lo], feet[hi], {o.root_rtol, 1e-15, 200});
      out.u[ti][m] = launch(xi, std::span<const double>(single, 1)).y[0][1];
    }
  }
  return {out, "characteristics"};
}

struct ResidualNorms {
  double sup = 0.0;
  double l2 = 0.0;  // root mean square over the nodes used
  double worst_t = std::numeric_limits<double>::quiet_NaN();
  double worst_x = std::numeric_limits<double>::quiet_NaN();
  std::size_t nodes = 0;
  bool degenerate = false;
};

namespace detail {

inline std::vector<double> stationary_nodes(const Curve& c) {
  if (c.kind() == CurveKind::tabulated) return c.nodes();
  return numerics::linspace(c.domain().lo, c.domain().hi, 201);
}

// residual(u, u_t, u_x) over interior nodes
template <class Res>
ResidualNorms strategy_residual(const FeedbackStrategy& s, Res&& res) {
  ResidualNorms n;
  double acc = 0.0;
  auto take = [&](double t, double x, double v) {
    if (!std::isfinite(v)) {
      n.degenerate = true;
      return;
    }
    acc += v * v;
    ++n.nodes;
    if (std::abs(v) >= n.sup) {
      n.sup = std::abs(v);
      n.worst_t = t;
      n.worst_x = x;
    }
  };
  if (s.stationary()) {
    const Curve& c = s.curve();
    const auto xs = stationary_nodes(c);
    if (xs.size() < 5) {
      n.degenerate = true;
      n.sup = n.l2 = std::numeric_limits<double>::quiet_NaN();
      return n;
    }
    std::vector<double> us(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) us[i] = c(xs[i]);
    const auto ux = numerics::grid_derivative(xs, us);
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) take(0.0, xs[i], res(us[i], 0.0, ux[i]));
  } else {
    const auto& gd = s.grid();
    if (gd.x.size() < 5 || gd.t.size() < 5) {
      n.degenerate = true;
      n.sup = n.l2 = std::numeric_limits<double>::quiet_NaN();
      return n;
    }
    const std::size_t nt = gd.t.size(), nx = gd.x.size();
    std::vector<std::vector<double>> ux(nt), ut(nt, std::vector<double>(nx));
    for (std::size_t i = 0; i < nt; ++i) ux[i] = numerics::grid_derivative(gd.x, gd.u[i]);
    for (std::size_t j = 0; j < nx; ++j) {
      std::vector<double> col(nt);
      for (std::size_t i = 0; i < nt; ++i) col[i] = gd.u[i][j];
      const auto d = numerics::grid_derivative(gd.t, col);
      for (std::size_t i = 0; i < nt; ++i) ut[i][j] = d[i];
    }
    for (std::size_t i = 1; i + 1 < nt; ++i)
      for (std::size_t j = 1; j + 1 < nx; ++j) take(gd.t[i], gd.x[j], res(gd.u[i][j], ut[i][j], ux[i][j]));
  }
  n.l2 = n.nodes ? std::sqrt(acc / static_cast<double>(n.nodes)) : std::numeric_limits<double>::quiet_NaN();
  if (n.nodes == 0) n.degenerate = true;
  return n;
}

}  // namespace detail

/// u_t + a(u)·u_x + r·e1(u) on interior grid nodes.
inline ResidualNorms game_pde_residual(const FeedbackStrategy& s, const GameSpec& g, const RiskProfile& p) {
  const auto a = detail::advection(p, g.N);
  const Curve e1 = p.e1;
  const double r = g.r;
  return detail::strategy_residual(s, [&](double u, double ut, double ux) {
    if (!p.domain.contains(u)) return std::numeric_limits<double>::quiet_NaN();
    return ut + a(u) * ux + r * e1(u);
  });
}

}  // namespace oligo
