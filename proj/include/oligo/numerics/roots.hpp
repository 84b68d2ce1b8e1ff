#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "oligo/errors.hpp"

namespace oligo::numerics {

struct RootOptions {
  double rtol = 1e-12;
  double atol = 1e-300;
  int max_iter = 400;
};

/// Brent's method on a sign-changing bracket [a, b].
template <class F>
double brent(F&& f, double a, double b, const RootOptions& opts = {}) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!std::isfinite(fa) || !std::isfinite(fb)) throw NoRootError("bracket endpoint is not finite", a);
  if ((fa > 0.0) == (fb > 0.0)) {
    throw NoRootError("no sign change on [" + std::to_string(a) + ", " + std::to_string(b) + "]", a);
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < opts.max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                       0.5 * std::max(opts.atol, opts.rtol * std::abs(b));
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
    if (!std::isfinite(fb)) throw NoRootError("function not finite inside bracket", b);
  }
  throw NoRootError("root iteration did not converge", b);
}

/// Newton steps from x0, falling back to bisection whenever a step leaves
/// the current bracket or the residual fails to halve.
template <class F, class DF>
double newton_bisect(F&& f, DF&& df, double lo, double hi, double x0, const RootOptions& opts = {}) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NoRootError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", lo);
  }
  double x = std::clamp(x0, lo, hi);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (!std::isfinite(fx)) throw NoRootError("function not finite inside bracket", x);
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double tol = std::max(opts.atol, opts.rtol * std::abs(x));
    if (hi - lo <= tol) return 0.5 * (lo + hi);
    const double d = df(x);
    double next = x - fx / d;
    if (!std::isfinite(next) || next <= lo || next >= hi || std::abs(fx) > 0.5 * last) next = 0.5 * (lo + hi);
    last = std::abs(fx);
    if (std::abs(next - x) <= tol) return next;
    x = next;
  }
  throw NoRootError("safeguarded Newton did not converge", x);
}

/// Plain bisection; monotone predicate version used for shooting brackets.
template <class F>
double bisect(F&& f, double lo, double hi, const RootOptions& opts = {}) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NoRootError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", lo);
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= std::max(opts.atol, opts.rtol * std::abs(mid))) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oligo::numerics
