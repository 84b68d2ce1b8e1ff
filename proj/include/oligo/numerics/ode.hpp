#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oligo/errors.hpp"

namespace oligo::numerics {

template <std::size_t D>
using State = std::array<double, D>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: pick automatically
  double max_step = 0.0;      // 0: unbounded
  std::size_t max_steps = 2'000'000;
};

template <std::size_t D>
struct OdeTrajectory {
  std::vector<double> t;
  std::vector<State<D>> y;
  std::vector<State<D>> dy;  // right-hand side at each output point
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

struct NoGuard {
  template <class S>
  void operator()(double, const S&) const {}
};

namespace detail {

template <std::size_t D>
double error_norm(const State<D>& err, const State<D>& y0, const State<D>& y1, const OdeOptions& o) {
  double acc = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(D));
}

template <std::size_t D>
State<D> axpy(const State<D>& y, double h, std::initializer_list<std::pair<double, const State<D>*>> terms) {
  State<D> out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < D; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

}  // namespace detail

/// Dormand–Prince 5(4) with step-size control. The solution is reported
/// exactly at every abscissa in `outputs` (monotone in the direction of
/// integration, starting at or after t0). `guard(t, y)` runs after every
/// accepted step and may throw to abort.
template <std::size_t D, class Rhs, class Guard = NoGuard>
OdeTrajectory<D> dopri5(Rhs&& rhs, double t0, State<D> y0, std::span<const double> outputs,
                        const OdeOptions& opts = {}, Guard&& guard = {}) {
  OdeTrajectory<D> out;
  if (outputs.empty()) return out;
  const double t_end = outputs.back();
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double prev = i == 0 ? t0 : outputs[i - 1];
    if (dir * (outputs[i] - prev) < 0.0) throw ValueError("ODE output abscissae are not monotone");
  }

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  State<D> y = y0;
  State<D> k1 = rhs(t, y);

  std::size_t next = 0;
  while (next < outputs.size() && outputs[next] == t0) {
    out.t.push_back(t);
    out.y.push_back(y);
    out.dy.push_back(k1);
    ++next;
  }
  if (next == outputs.size()) return out;

  const double span = std::abs(t_end - t0);
  double h = opts.initial_step;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / D);
    d1 = std::sqrt(d1 / D);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::max(1.0, span) : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

  const double tiny = 64.0 * std::numeric_limits<double>::epsilon();
  while (next < outputs.size()) {
    if (out.steps + out.rejected >= opts.max_steps) {
      throw StallError("ODE integration exceeded " + std::to_string(opts.max_steps) + " steps", t);
    }
    const double target = outputs[next];
    bool lands = false;
    double step = h;
    if (step >= std::abs(target - t)) {
      step = std::abs(target - t);
      lands = true;
    }
    if (step <= tiny * std::max(1.0, std::abs(t))) {
      if (lands) {
        // already at the output abscissa up to rounding
        t = target;
        out.t.push_back(t);
        out.y.push_back(y);
        out.dy.push_back(k1);
        ++next;
        continue;
      }
      throw StallError("ODE step size underflow", t);
    }
    const double hs = dir * step;

    const State<D> k2 = rhs(t + c2 * hs, detail::axpy<D>(y, hs, {{a21, &k1}}));
    const State<D> k3 = rhs(t + c3 * hs, detail::axpy<D>(y, hs, {{a31, &k1}, {a32, &k2}}));
    const State<D> k4 = rhs(t + c4 * hs, detail::axpy<D>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<D> k5 =
        rhs(t + c5 * hs, detail::axpy<D>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<D> k6 =
        rhs(t + hs, detail::axpy<D>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<D> y1 = detail::axpy<D>(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State<D> k7 = rhs(t + hs, y1);

    State<D> err{};
    for (std::size_t i = 0; i < D; ++i) {
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    const double en = detail::error_norm<D>(err, y, y1, opts);
    if (!std::isfinite(en)) {
      ++out.rejected;
      h = 0.25 * step;
      continue;
    }
    if (en <= 1.0) {
      t = lands ? target : t + hs;
      y = y1;
      k1 = k7;
      ++out.steps;
      guard(t, y);
      if (lands) {
        out.t.push_back(t);
        out.y.push_back(y);
        out.dy.push_back(k1);
        ++next;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      // a landing step may be artificially short; keep the previous proposal
      h = lands ? std::max(h, step * fac) : step * fac;
    } else {
      ++out.rejected;
      h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
  return out;
}

/// Convenience: state at t1 only.
template <std::size_t D, class Rhs, class Guard = NoGuard>
State<D> dopri5_to(Rhs&& rhs, double t0, const State<D>& y0, double t1, const OdeOptions& opts = {},
                   Guard&& guard = {}) {
  const double o[1] = {t1};
  auto traj = dopri5<D>(std::forward<Rhs>(rhs), t0, y0, std::span<const double>(o, 1), opts,
                        std::forward<Guard>(guard));
  return traj.y.back();
}

}  // namespace oligo::numerics
