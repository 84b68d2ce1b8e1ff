#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "oligo/errors.hpp"

namespace oligo::numerics {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = std::size_t{1} << 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 abscissae/weights).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  fv[7] = f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    fv[j] = f(center - dx);
    fv[14 - j] = f(center + dx);
  }
  double kronrod = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  double abs_sum = std::abs(kronrod);
  for (int j = 0; j < 7; ++j) {
    const double pair = fv[j] + fv[14 - j];
    kronrod += kKronrodWeights[j] * pair;
    abs_sum += kKronrodWeights[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  for (double v : fv) {
    if (!std::isfinite(v)) {
      throw QuadratureError("integrand is not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                            center);
    }
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kKronrodWeights[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  kronrod *= half;
  gauss *= half;
  abs_sum *= std::abs(half);
  asc *= std::abs(half);
  double err = std::abs(kronrod - gauss);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * abs_sum, err);
  return {a, b, kronrod, err};
}

}  // namespace detail

/// Globally adaptive Gauss–Kronrod quadrature of f over [a, b] (a > b allowed).
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) throw QuadratureError("non-finite integration limits");
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);

  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  std::size_t count = 1;

  while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (count >= opts.max_subdivisions) {
      throw QuadratureError("tolerance not met after " + std::to_string(count) + " subdivisions (error " +
                                std::to_string(total_err) + ")",
                            0.5 * (lo + hi));
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("interval collapsed below machine resolution", mid);
    }
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
    // re-sum occasionally to stop drift in the running totals
    if (count % 256 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {sign * total, total_err, count};
}

template <class F>
double integral(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  return integrate(std::forward<F>(f), a, b, opts).value;
}

/// out[i] = ∫_{nodes[0]}^{nodes[i]} f, accumulated interval by interval.
template <class F>
std::vector<double> cumulative_integral(F&& f, std::span<const double> nodes, const QuadratureOptions& opts = {}) {
  std::vector<double> out(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    out[i] = out[i - 1] + integrate(f, nodes[i - 1], nodes[i], opts).value;
  }
  return out;
}

}  // namespace oligo::numerics
