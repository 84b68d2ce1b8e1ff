#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "oligo/errors.hpp"

namespace oligo {

/// A scalar function with its first two derivatives. The named families
/// (exp, power, log, linear, quadratic, zero) are serializable; `custom`
/// wraps arbitrary callables for library use.
struct ScalarFunction {
  using Fn = std::function<double(double)>;

  std::string family = "zero";
  std::map<std::string, double> params;
  Fn f = [](double) { return 0.0; };
  Fn df = [](double) { return 0.0; };
  Fn d2f = [](double) { return 0.0; };

  double operator()(double u) const { return f(u); }
  double d1(double u) const { return df(u); }
  double d2(double u) const { return d2f(u); }

  static ScalarFunction zero() { return {}; }

  // c·e^{k u}
  static ScalarFunction exp(double c, double k) {
    ScalarFunction s;
    s.family = "exp";
    s.params = {{"c", c}, {"k", k}};
    s.f = [c, k](double u) { return c * std::exp(k * u); };
    s.df = [c, k](double u) { return c * k * std::exp(k * u); };
    s.d2f = [c, k](double u) { return c * k * k * std::exp(k * u); };
    return s;
  }

  // c·u^p
  static ScalarFunction power(double c, double p) {
    ScalarFunction s;
    s.family = "power";
    s.params = {{"c", c}, {"p", p}};
    s.f = [c, p](double u) { return c * std::pow(u, p); };
    s.df = [c, p](double u) { return c * p * std::pow(u, p - 1.0); };
    s.d2f = [c, p](double u) { return c * p * (p - 1.0) * std::pow(u, p - 2.0); };
    return s;
  }

  // c·ln u
  static ScalarFunction log(double c) {
    ScalarFunction s;
    s.family = "log";
    s.params = {{"c", c}};
    s.f = [c](double u) { return c * std::log(u); };
    s.df = [c](double u) { return c / u; };
    s.d2f = [c](double u) { return -c / (u * u); };
    return s;
  }

  // c·u + d
  static ScalarFunction linear(double c, double d = 0.0) {
    ScalarFunction s;
    s.family = "linear";
    s.params = {{"c", c}, {"d", d}};
    s.f = [c, d](double u) { return c * u + d; };
    s.df = [c](double) { return c; };
    s.d2f = [](double) { return 0.0; };
    return s;
  }

  // a·u² + b·u + c
  static ScalarFunction quadratic(double a, double b, double c) {
    ScalarFunction s;
    s.family = "quadratic";
    s.params = {{"a", a}, {"b", b}, {"c", c}};
    s.f = [a, b, c](double u) { return (a * u + b) * u + c; };
    s.df = [a, b](double u) { return 2.0 * a * u + b; };
    s.d2f = [a](double) { return 2.0 * a; };
    return s;
  }

  static ScalarFunction custom(Fn f, Fn df, Fn d2f, std::string name = "custom") {
    ScalarFunction s;
    s.family = std::move(name);
    s.params.clear();
    s.f = std::move(f);
    s.df = std::move(df);
    s.d2f = std::move(d2f);
    return s;
  }

  /// Rebuild a named family from its parameters.
  static ScalarFunction from_family(const std::string& family, const std::map<std::string, double>& p) {
    auto get = [&](const char* k, double dflt) {
      auto it = p.find(k);
      return it == p.end() ? dflt : it->second;
    };
    if (family == "zero") return zero();
    if (family == "exp") return exp(get("c", 1.0), get("k", 1.0));
    if (family == "power") return power(get("c", 1.0), get("p", 1.0));
    if (family == "log") return log(get("c", 1.0));
    if (family == "linear") return linear(get("c", 1.0), get("d", 0.0));
    if (family == "quadratic") return quadratic(get("a", 0.0), get("b", 0.0), get("c", 0.0));
    throw SchemaError("unknown function family '" + family + "'");
  }

  bool is_zero() const { return family == "zero"; }
};

}  // namespace oligo
