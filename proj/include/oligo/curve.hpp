#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oligo/errors.hpp"
#include "oligo/numerics/finite_difference.hpp"

namespace oligo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class CurveKind { closed_form, tabulated };

// where the numbers come from; drives verifier thresholds and report provenance
enum class Provenance { analytic, quadrature, interpolated };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "closed_form";
    case Provenance::quadrature: return "quadrature";
    case Provenance::interpolated: return "tabulated";
  }
  return "unknown";
}

/// Scalar function of one variable on a closed interval. Immutable; copies
/// share state. Evaluating outside the domain raises DomainError.
class Curve {
 public:
  using Fn = std::function<double(double)>;
  using Params = std::map<std::string, double>;

  Curve() = default;

  static Curve closed_form(std::string tag, Params params, Interval dom, Fn value, Fn slope = {}, Fn second = {},
                           Provenance prov = Provenance::analytic) {
    if (!(dom.hi >= dom.lo)) throw ValueError("curve domain is empty");
    auto s = std::make_shared<State>();
    s->kind = CurveKind::closed_form;
    s->tag = std::move(tag);
    s->params = std::move(params);
    s->domain = dom;
    s->value = std::move(value);
    s->slope = std::move(slope);
    s->second = std::move(second);
    s->provenance = prov;
    return Curve(std::move(s));
  }

  static Curve constant(double c, Interval dom) {
    return closed_form(
        "constant", {{"c", c}}, dom, [c](double) { return c; }, [](double) { return 0.0; },
        [](double) { return 0.0; });
  }

  /// k·x + d
  static Curve affine(double k, double d, Interval dom) {
    return closed_form(
        "affine", {{"k", k}, {"d", d}}, dom, [k, d](double x) { return k * x + d; }, [k](double) { return k; },
        [](double) { return 0.0; });
  }

  /// c·x^p
  static Curve power(double c, double p, Interval dom) {
    return closed_form(
        "power", {{"c", c}, {"p", p}}, dom, [c, p](double x) { return c * std::pow(x, p); },
        [c, p](double x) { return c * p * std::pow(x, p - 1.0); },
        [c, p](double x) { return c * p * (p - 1.0) * std::pow(x, p - 2.0); });
  }

  /// Clamped cubic spline; end slopes from one-sided 4th-order differences.
  static Curve spline(std::vector<double> x, std::vector<double> y) {
    check_nodes(x, y, 4);
    const std::size_t n = x.size();
    const auto d0 = numerics::grid_derivative(x, y);
    std::vector<double> m(n, 0.0);
    m.front() = d0.front();
    m.back() = d0.back();
    if (n > 2) {
      // tridiagonal system for interior slopes
      const std::size_t k = n - 2;
      std::vector<double> sub(k), diag(k), sup(k), rhs(k);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1];
        const double hr = x[i + 1] - x[i];
        const double dl = (y[i] - y[i - 1]) / hl;
        const double dr = (y[i + 1] - y[i]) / hr;
        sub[i - 1] = hr;
        diag[i - 1] = 2.0 * (hl + hr);
        sup[i - 1] = hl;
        rhs[i - 1] = 3.0 * (hr * dl + hl * dr);
      }
      rhs.front() -= sub.front() * m.front();
      rhs.back() -= sup.back() * m.back();
      for (std::size_t i = 1; i < k; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      m[k] = rhs[k - 1] / diag[k - 1];
      for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
    }
    return tabulated(std::move(x), std::move(y), std::move(m), "spline");
  }

  static Curve hermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy,
                       Provenance prov = Provenance::interpolated) {
    check_nodes(x, y, 2);
    if (dy.size() != x.size()) throw ValueError("hermite: slope count mismatch");
    Curve c = tabulated(std::move(x), std::move(y), std::move(dy), "hermite");
    std::const_pointer_cast<State>(c.s_)->provenance = prov;
    return c;
  }

  bool valid() const { return static_cast<bool>(s_); }
  CurveKind kind() const { return s().kind; }
  Provenance provenance() const { return s().provenance; }
  const std::string& tag() const { return s().tag; }
  const Params& params() const { return s().params; }
  std::optional<double> param(const std::string& name) const {
    auto it = s().params.find(name);
    if (it == s().params.end()) return std::nullopt;
    return it->second;
  }
  Interval domain() const { return s().domain; }
  const std::vector<double>& nodes() const { return s().x; }
  const std::vector<double>& values() const { return s().y; }
  const std::vector<double>& slopes() const { return s().m; }

  double operator()(double x) const { return value(x); }

  double value(double x) const {
    x = admit(x);
    const State& st = s();
    if (st.kind == CurveKind::closed_form) return st.value(x);
    const auto [i, t, h] = locate(x);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * st.y[i] + (t3 - 2 * t2 + t) * h * st.m[i] + (-2 * t3 + 3 * t2) * st.y[i + 1] +
           (t3 - t2) * h * st.m[i + 1];
  }

  double slope(double x) const {
    x = admit(x);
    const State& st = s();
    if (st.kind == CurveKind::closed_form) {
      if (st.slope) return st.slope(x);
      return numerics::fd_derivative([&](double z) { return st.value(z); }, x, st.domain.lo, st.domain.hi, 1);
    }
    const auto [i, t, h] = locate(x);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * st.y[i] + (3 * t2 - 4 * t + 1) * h * st.m[i] + (-6 * t2 + 6 * t) * st.y[i + 1] +
            (3 * t2 - 2 * t) * h * st.m[i + 1]) /
           h;
  }

  double second(double x) const {
    x = admit(x);
    const State& st = s();
    if (st.kind == CurveKind::closed_form) {
      if (st.second) return st.second(x);
      if (st.slope) {
        return numerics::fd_derivative([&](double z) { return st.slope(z); }, x, st.domain.lo, st.domain.hi, 1);
      }
      return numerics::fd_derivative([&](double z) { return st.value(z); }, x, st.domain.lo, st.domain.hi, 2);
    }
    const auto [i, t, h] = locate(x);
    return ((12 * t - 6) * st.y[i] + (6 * t - 4) * h * st.m[i] + (-12 * t + 6) * st.y[i + 1] +
            (6 * t - 2) * h * st.m[i + 1]) /
           (h * h);
  }

  /// Pointwise product with a constant, keeping representation and tag.
  Curve scaled(double k) const {
    const State& st = s();
    if (st.kind == CurveKind::tabulated) {
      auto y = st.y;
      auto m = st.m;
      for (auto& v : y) v *= k;
      for (auto& v : m) v *= k;
      Curve c = tabulated(st.x, std::move(y), std::move(m), st.tag);
      std::const_pointer_cast<State>(c.s_)->provenance = st.provenance;
      return c;
    }
    Params p = st.params;
    p["scale"] = p.count("scale") ? p["scale"] * k : k;
    Fn v = [f = st.value, k](double x) { return k * f(x); };
    Fn d = st.slope ? Fn([f = st.slope, k](double x) { return k * f(x); }) : Fn{};
    Fn d2 = st.second ? Fn([f = st.second, k](double x) { return k * f(x); }) : Fn{};
    return closed_form(st.tag, std::move(p), st.domain, std::move(v), std::move(d), std::move(d2), st.provenance);
  }

  /// Same function on a narrower interval.
  Curve restricted(Interval dom) const {
    const State& st = s();
    if (dom.lo < st.domain.lo || dom.hi > st.domain.hi) throw DomainError("restriction outside curve domain", dom.lo);
    auto copy = std::make_shared<State>(st);
    copy->domain = dom;
    return Curve(std::move(copy));
  }

 private:
  struct State {
    CurveKind kind = CurveKind::closed_form;
    Provenance provenance = Provenance::analytic;
    std::string tag;
    Params params;
    Interval domain;
    Fn value, slope, second;
    std::vector<double> x, y, m;
  };

  explicit Curve(std::shared_ptr<const State> s) : s_(std::move(s)) {}

  const State& s() const {
    if (!s_) throw ValueError("evaluating an empty curve");
    return *s_;
  }

  static void check_nodes(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_nodes) {
    if (x.size() != y.size()) throw ValueError("curve: abscissa/ordinate count mismatch");
    if (x.size() < min_nodes) {
      throw ValueError("curve: need at least " + std::to_string(min_nodes) + " nodes, got " +
                       std::to_string(x.size()));
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw ValueError("curve: abscissae must be strictly increasing", x[i]);
    }
  }

  static Curve tabulated(std::vector<double> x, std::vector<double> y, std::vector<double> m, std::string tag) {
    auto s = std::make_shared<State>();
    s->kind = CurveKind::tabulated;
    s->provenance = Provenance::interpolated;
    s->tag = std::move(tag);
    s->domain = {x.front(), x.back()};
    s->x = std::move(x);
    s->y = std::move(y);
    s->m = std::move(m);
    return Curve(std::move(s));
  }

  double admit(double x) const {
    const Interval d = s().domain;
    if (x >= d.lo && x <= d.hi) return x;
    // tolerate rounding at the edges only
    const double slack_lo = 1e-12 * std::max(1.0, std::abs(d.lo));
    const double slack_hi = 1e-12 * std::max(1.0, std::abs(d.hi));
    if (x < d.lo && x >= d.lo - slack_lo) return d.lo;
    if (x > d.hi && x <= d.hi + slack_hi) return d.hi;
    throw DomainError("curve '" + s().tag + "' evaluated at " + std::to_string(x) + " outside [" +
                          std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]",
                      x);
  }

  struct Loc {
    std::size_t i;
    double t, h;
  };

  Loc locate(double x) const {
    const auto& xs = s().x;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    i = std::min(i, xs.size() - 2);
    const double h = xs[i + 1] - xs[i];
    return {i, (x - xs[i]) / h, h};
  }

  std::shared_ptr<const State> s_;
};

}  // namespace oligo
