#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "oligo/errors.hpp"

namespace oligo::numerics {

/// Fornberg's recursion: weights[k][j] approximate the k-th derivative at z
/// from samples at nodes[j], for k = 0..order.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int order) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> c(static_cast<std::size_t>(order) + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min(static_cast<int>(i), order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Derivative of tabulated data at every node with a 5-point stencil
/// (4th order for first derivatives): centred inside, one-sided at the ends.
/// Works on non-uniform grids. Fewer than 5 nodes uses all of them.
inline std::vector<double> grid_derivative(std::span<const double> x, std::span<const double> y, int order = 1) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ValueError("grid_derivative: size mismatch");
  if (n < 2) throw ValueError("grid_derivative: need at least two nodes");
  const std::size_t width = std::min<std::size_t>(5, n);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i >= width / 2 ? i - width / 2 : 0;
    start = std::min(start, n - width);
    const auto w = fornberg_weights(x[i], x.subspan(start, width), order);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[order][j] * y[start + j];
    out[i] = acc;
  }
  return out;
}

inline double fd_step(double x, int order = 1) {
  const double eps = std::numeric_limits<double>::epsilon();
  // near-optimal steps for the 4th-order stencils below
  const double base = order == 1 ? std::pow(eps, 0.2) : std::pow(eps, 1.0 / 6.0);
  return base * std::max(1.0, std::abs(x));
}

/// 4th-order derivative of a callable at x restricted to [lo, hi]: centred
/// when the stencil fits, otherwise shifted one-sided.
template <class F>
double fd_derivative(F&& f, double x, double lo = -std::numeric_limits<double>::infinity(),
                     double hi = std::numeric_limits<double>::infinity(), int order = 1, double h = 0.0) {
  if (h <= 0.0) h = fd_step(x, order);
  if (std::isfinite(lo) && std::isfinite(hi)) h = std::min(h, (hi - lo) / 8.0);
  int shift = 0;
  if (x - 2 * h < lo) shift = static_cast<int>(std::ceil((lo - (x - 2 * h)) / h));
  if (x + 2 * h > hi) shift = -static_cast<int>(std::ceil(((x + 2 * h) - hi) / h));
  shift = std::clamp(shift, -4, 4);
  double nodes[5];
  double vals[5];
  for (int j = 0; j < 5; ++j) {
    nodes[j] = x + (j - 2 + shift) * h;
    if (j - 2 + shift == 0) nodes[j] = x;
    nodes[j] = std::clamp(nodes[j], lo, hi);
    vals[j] = f(nodes[j]);
  }
  const auto w = fornberg_weights(x, std::span<const double>(nodes, 5), order);
  double acc = 0.0;
  for (int j = 0; j < 5; ++j) acc += w[order][j] * vals[j];
  return acc;
}

}  // namespace oligo::numerics
