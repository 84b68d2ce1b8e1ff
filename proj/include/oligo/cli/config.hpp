#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oligo/additive_duopoly.hpp"
#include "oligo/asym_duopoly.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/scalar_function.hpp"

namespace oligo::cli {

using json = nlohmann::ordered_json;

enum class Command { derive, mpne, verify, ci, rationalize, asym, sweep };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::derive, "derive"},   {Command::mpne, "mpne"},   {Command::verify, "verify"},
      {Command::ci, "ci"},           {Command::rationalize, "rationalize"},
      {Command::asym, "asym"},       {Command::sweep, "sweep"}};
  return names;
}

inline std::string command_name(Command c) {
  for (const auto& [k, v] : command_names())
    if (k == c) return v;
  return "";
}

struct NumericsConfig {
  std::optional<double> rho;
  std::optional<double> C;
  double u_ref = 1.0;
  Interval work_range{0.1, 10.0};
  Interval x_range{0.1, 10.0};
  std::size_t grid = 101;
  std::optional<double> tol;  // verifier "equivalent" threshold; "not equivalent" is 100×tol
  bool force_quadrature = false;
  Branch branch = Branch::plus;
  ThetaConvention convention = ThetaConvention::displayed;
};

struct AdditiveConfig {
  AdditiveSpec spec;
  Interval box1{0.5, 2.0};
  Interval box2{0.5, 2.0};
  std::optional<std::pair<double, double>> anchor;  // default: diagonal at mid of range
  Interval range{0.5, 1.5};
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
};

struct RunConfig {
  Command command = Command::derive;
  std::optional<GameSpec> game;
  std::optional<AsymParams> asym;
  std::optional<AdditiveConfig> additive;
  NumericsConfig numerics;
  std::optional<SweepConfig> sweep;
};

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& function_params() {
  static const std::map<std::string, std::vector<std::string>> p = {
      {"zero", {}},           {"exp", {"c", "k"}},   {"power", {"c", "p"}},
      {"log", {"c"}},         {"linear", {"c", "d"}}, {"quadratic", {"a", "b", "c"}}};
  return p;
}

/// Strict object reader: tracks consumed keys, reports problems with JSON paths.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(path_ + ": expected an object");
  }

  bool ok() const { return j_.is_object(); }
  bool has(const std::string& k) const { return ok() && j_.contains(k); }
  std::string at(const std::string& k) const { return path_ + "." + k; }

  const json* get(const std::string& k, bool required) {
    used_.insert(k);
    if (!ok()) return nullptr;
    auto it = j_.find(k);
    if (it == j_.end()) {
      if (required) errors_.push_back(at(k) + ": missing required key");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const std::string& k, bool required = false) {
    const json* v = get(k, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      errors_.push_back(at(k) + ": expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<long long> integer(const std::string& k, bool required = false) {
    const json* v = get(k, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      errors_.push_back(at(k) + ": expected an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<std::string> string(const std::string& k, bool required = false) {
    const json* v = get(k, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      errors_.push_back(at(k) + ": expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& k) {
    const json* v = get(k, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      errors_.push_back(at(k) + ": expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<Interval> interval(const std::string& k) {
    const json* v = get(k, false);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      errors_.push_back(at(k) + ": expected [lo, hi]");
      return std::nullopt;
    }
    return Interval{(*v)[0].get<double>(), (*v)[1].get<double>()};
  }

  std::optional<std::vector<double>> numbers(const std::string& k, bool required = false) {
    const json* v = get(k, required);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      errors_.push_back(at(k) + ": expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) {
        errors_.push_back(at(k) + ": expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() {
    if (!ok()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) errors_.push_back(at(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

inline ScalarFunction read_function(const json& j, const std::string& path, std::vector<std::string>& errors) {
  Reader r(j, path, errors);
  if (!r.ok()) return {};
  const auto fam = r.string("family", true).value_or("zero");
  const auto& table = function_params();
  auto it = table.find(fam);
  if (it == table.end()) {
    errors.push_back(r.at("family") + ": unknown function family '" + fam + "'");
    return {};
  }
  std::map<std::string, double> params;
  for (const auto& k : it->second)
    if (auto v = r.number(k)) params[k] = *v;
  r.finish();
  return ScalarFunction::from_family(fam, params);
}

inline json write_function(const ScalarFunction& f) {
  if (!function_params().count(f.family)) throw SchemaError("function family '" + f.family + "' is not serializable");
  json j;
  j["family"] = f.family;
  for (const auto& k : function_params().at(f.family)) {
    auto it = f.params.find(k);
    if (it != f.params.end()) j[k] = it->second;
  }
  return j;
}

inline json write_interval(Interval i) { return json::array({i.lo, i.hi}); }

inline void check_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValueError(path + ": must be positive and finite, got " + std::to_string(v));
}

inline void check_interval(Interval i, const std::string& path, bool positive) {
  if (!std::isfinite(i.lo) || !std::isfinite(i.hi) || !(i.lo < i.hi))
    throw ValueError(path + ": need lo < hi");
  if (positive && !(i.lo > 0.0)) throw ValueError(path + ": lower end must be positive");
}

inline GameSpec read_game(const json& j, const std::string& path, std::vector<std::string>& errors) {
  GameSpec g;
  Reader r(j, path, errors);
  if (!r.ok()) return g;
  const auto fam = r.string("family", true).value_or("");
  if (auto n = r.integer("N")) g.N = static_cast<int>(*n);
  if (auto v = r.number("r")) g.r = *v;
  if (auto v = r.interval("rate_domain")) g.rate_domain = *v;
  if (auto v = r.number("x_max")) g.x_max = *v;
  if (fam == "cobb_douglas") {
    CobbDouglas cd;
    cd.alpha = r.number("alpha", true).value_or(cd.alpha);
    cd.beta = r.number("beta", true).value_or(cd.beta);
    g.utility = cd;
  } else if (fam == "isoelastic_pricing") {
    IsoelasticPricing ip;
    ip.A = r.number("A").value_or(ip.A);
    ip.q = r.number("q", true).value_or(ip.q);
    if (const json* c = r.get("cost", false)) ip.cost = read_function(*c, r.at("cost"), errors);
    g.utility = ip;
  } else if (fam == "additive_separable") {
    AdditiveSeparable as;
    if (const json* o = r.get("own", true)) as.own = read_function(*o, r.at("own"), errors);
    if (const json* c = r.get("cross", false)) as.cross = read_function(*c, r.at("cross"), errors);
    g.utility = as;
  } else if (!fam.empty()) {
    errors.push_back(r.at("family") + ": unknown utility family '" + fam + "'");
  }
  if (const json* h = r.get("horizon", false)) {
    Reader hr(*h, r.at("horizon"), errors);
    if (hr.ok()) {
      const auto T = hr.number("T", true);
      const json* b = hr.get("bequest", true);
      if (T && b) g.horizon = FiniteHorizon{*T, read_function(*b, hr.at("bequest"), errors)};
      hr.finish();
    }
  }
  r.finish();
  return g;
}

inline void check_game(const GameSpec& g, const std::string& path) {
  if (g.N < 1) throw ValueError(path + ".N: must be at least 1");
  if (!(g.r >= 0.0) || !std::isfinite(g.r)) throw ValueError(path + ".r: must be finite and nonnegative");
  check_interval(g.rate_domain, path + ".rate_domain", true);
  check_positive(g.x_max, path + ".x_max");
  if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    check_positive(cd->alpha, path + ".alpha");
    check_positive(cd->beta, path + ".beta");
    if (cd->alpha == 1.0) throw ValueError(path + ".alpha: alpha = 1 divides by 1 - alpha");
  }
  if (const auto* ip = std::get_if<IsoelasticPricing>(&g.utility)) {
    check_positive(ip->A, path + ".A");
    check_positive(ip->q, path + ".q");
  }
  if (g.finite()) check_positive(g.finite_horizon().T, path + ".horizon.T");
}

inline json write_game(const GameSpec& g) {
  json j;
  j["family"] = family_name(g.utility);
  if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    j["alpha"] = cd->alpha;
    j["beta"] = cd->beta;
  } else if (const auto* ip = std::get_if<IsoelasticPricing>(&g.utility)) {
    j["A"] = ip->A;
    j["q"] = ip->q;
    j["cost"] = write_function(ip->cost);
  } else if (const auto* as = std::get_if<AdditiveSeparable>(&g.utility)) {
    j["own"] = write_function(as->own);
    j["cross"] = write_function(as->cross);
  } else {
    throw SchemaError("custom utilities cannot be serialized");
  }
  j["N"] = g.N;
  j["r"] = g.r;
  j["rate_domain"] = write_interval(g.rate_domain);
  j["x_max"] = g.x_max;
  if (g.finite()) {
    const auto& fh = g.finite_horizon();
    j["horizon"] = {{"T", fh.T}, {"bequest", write_function(fh.bequest)}};
  }
  return j;
}

inline AsymParams read_asym(const json& j, const std::string& path, std::vector<std::string>& errors) {
  AsymParams p;
  Reader r(j, path, errors);
  if (!r.ok()) return p;
  p.alpha1 = r.number("alpha1", true).value_or(p.alpha1);
  p.alpha2 = r.number("alpha2", true).value_or(p.alpha2);
  p.beta = r.number("beta", true).value_or(p.beta);
  p.r1 = r.number("r1").value_or(p.r1);
  p.r2 = r.number("r2").value_or(p.r2);
  r.finish();
  return p;
}

inline json write_asym(const AsymParams& p) {
  return {{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta", p.beta}, {"r1", p.r1}, {"r2", p.r2}};
}

inline void check_asym(const AsymParams& p, const std::string& path) {
  check_positive(p.alpha1, path + ".alpha1");
  check_positive(p.alpha2, path + ".alpha2");
  check_positive(p.beta, path + ".beta");
  if (!(p.r1 >= 0.0) || !(p.r2 >= 0.0)) throw ValueError(path + ": discount rates must be nonnegative");
  if (p.alpha1 == 1.0 || p.alpha2 == 1.0) throw ValueError(path + ": alpha_i = 1 divides by 1 - alpha_i");
  if (p.det() == 0.0) throw ValueError(path + ": alpha1*alpha2 - (1-beta)^2 must be nonzero");
}

inline AdditiveConfig read_additive(const json& j, const std::string& path, std::vector<std::string>& errors) {
  AdditiveConfig a;
  Reader r(j, path, errors);
  if (!r.ok()) return a;
  auto fn = [&](const char* k, bool required, ScalarFunction& out) {
    if (const json* v = r.get(k, required)) out = read_function(*v, r.at(k), errors);
  };
  fn("own1", true, a.spec.own1);
  fn("own2", true, a.spec.own2);
  fn("cross1", false, a.spec.cross1);
  fn("cross2", false, a.spec.cross2);
  fn("B1", false, a.spec.B1);
  fn("B2", false, a.spec.B2);
  a.spec.T = r.number("T").value_or(a.spec.T);
  if (auto v = r.interval("rate_domain")) a.spec.rate_domain = *v;
  if (auto v = r.interval("box1")) a.box1 = *v;
  if (auto v = r.interval("box2")) a.box2 = *v;
  if (auto v = r.interval("range")) a.range = *v;
  if (auto v = r.numbers("anchor")) {
    if (v->size() != 2) {
      errors.push_back(r.at("anchor") + ": expected [u1, u2]");
    } else {
      a.anchor = std::make_pair((*v)[0], (*v)[1]);
    }
  }
  r.finish();
  return a;
}

inline json write_additive(const AdditiveConfig& a) {
  json j;
  j["own1"] = write_function(a.spec.own1);
  j["own2"] = write_function(a.spec.own2);
  j["cross1"] = write_function(a.spec.cross1);
  j["cross2"] = write_function(a.spec.cross2);
  j["B1"] = write_function(a.spec.B1);
  j["B2"] = write_function(a.spec.B2);
  j["T"] = a.spec.T;
  j["rate_domain"] = write_interval(a.spec.rate_domain);
  j["box1"] = write_interval(a.box1);
  j["box2"] = write_interval(a.box2);
  j["range"] = write_interval(a.range);
  if (a.anchor) j["anchor"] = json::array({a.anchor->first, a.anchor->second});
  return j;
}

inline void check_additive(const AdditiveConfig& a, const std::string& path) {
  check_positive(a.spec.T, path + ".T");
  check_interval(a.spec.rate_domain, path + ".rate_domain", false);
  check_interval(a.box1, path + ".box1", false);
  check_interval(a.box2, path + ".box2", false);
  check_interval(a.range, path + ".range", false);
  if (a.anchor && !a.range.contains(a.anchor->first)) throw ValueError(path + ".anchor: u1 must lie in range");
}

inline NumericsConfig read_numerics(const json& j, const std::string& path, std::vector<std::string>& errors) {
  NumericsConfig n;
  Reader r(j, path, errors);
  if (!r.ok()) return n;
  n.rho = r.number("rho");
  n.C = r.number("C");
  n.u_ref = r.number("u_ref").value_or(n.u_ref);
  if (auto v = r.interval("work_range")) n.work_range = *v;
  if (auto v = r.interval("x_range")) n.x_range = *v;
  if (auto v = r.integer("grid")) {
    if (*v < 5) {
      errors.push_back(r.at("grid") + ": must be at least 5");
    } else {
      n.grid = static_cast<std::size_t>(*v);
    }
  }
  n.tol = r.number("tol");
  n.force_quadrature = r.boolean("force_quadrature").value_or(false);
  if (auto b = r.string("branch")) {
    if (*b == "plus") {
      n.branch = Branch::plus;
    } else if (*b == "minus") {
      n.branch = Branch::minus;
    } else {
      errors.push_back(r.at("branch") + ": expected 'plus' or 'minus'");
    }
  }
  if (auto c = r.string("convention")) {
    if (*c == "displayed") {
      n.convention = ThetaConvention::displayed;
    } else if (*c == "natural") {
      n.convention = ThetaConvention::natural;
    } else {
      errors.push_back(r.at("convention") + ": expected 'displayed' or 'natural'");
    }
  }
  r.finish();
  return n;
}

inline json write_numerics(const NumericsConfig& n) {
  json j;
  if (n.rho) j["rho"] = *n.rho;
  if (n.C) j["C"] = *n.C;
  j["u_ref"] = n.u_ref;
  j["work_range"] = write_interval(n.work_range);
  j["x_range"] = write_interval(n.x_range);
  j["grid"] = n.grid;
  if (n.tol) j["tol"] = *n.tol;
  j["force_quadrature"] = n.force_quadrature;
  j["branch"] = branch_name(n.branch);
  j["convention"] = n.convention == ThetaConvention::displayed ? "displayed" : "natural";
  return j;
}

inline void check_numerics(const NumericsConfig& n, const std::string& path) {
  if (n.rho && (!(*n.rho >= 0.0) || !std::isfinite(*n.rho))) throw ValueError(path + ".rho: must be nonnegative");
  if (n.C && (*n.C == 0.0 || !std::isfinite(*n.C))) throw ValueError(path + ".C: must be nonzero and finite");
  check_positive(n.u_ref, path + ".u_ref");
  check_interval(n.work_range, path + ".work_range", true);
  check_interval(n.x_range, path + ".x_range", true);
  if (n.tol) check_positive(*n.tol, path + ".tol");
}

}  // namespace detail

/// Strict parse of a config document; schema problems are collected and reported together.
inline RunConfig parse_config(const json& doc) {
  std::vector<std::string> errors;
  RunConfig c;
  detail::Reader r(doc, "$", errors);
  if (!r.ok()) throw SchemaError("$: config must be an object");
  const auto cmd = r.string("command", true);
  if (cmd) {
    bool found = false;
    for (const auto& [k, v] : command_names()) {
      if (v == *cmd) {
        c.command = k;
        found = true;
      }
    }
    if (!found) errors.push_back("$.command: unknown command '" + *cmd + "'");
  }
  if (const json* g = r.get("game", false)) c.game = detail::read_game(*g, "$.game", errors);
  if (const json* a = r.get("asym", false)) c.asym = detail::read_asym(*a, "$.asym", errors);
  if (const json* a = r.get("additive", false)) c.additive = detail::read_additive(*a, "$.additive", errors);
  if (const json* n = r.get("numerics", false)) c.numerics = detail::read_numerics(*n, "$.numerics", errors);
  if (const json* s = r.get("sweep", false)) {
    detail::Reader sr(*s, "$.sweep", errors);
    if (sr.ok()) {
      SweepConfig sw;
      sw.parameter = sr.string("parameter", true).value_or("");
      sw.values = sr.numbers("values", true).value_or(std::vector<double>{});
      sr.finish();
      c.sweep = sw;
    }
  }
  r.finish();

  if (cmd && errors.empty()) {
    switch (c.command) {
      case Command::derive:
      case Command::mpne:
      case Command::verify:
      case Command::ci:
        if (!c.game) errors.push_back("$.game: missing required key for command '" + *cmd + "'");
        break;
      case Command::sweep:
        if (!c.game) errors.push_back("$.game: missing required key for command 'sweep'");
        if (!c.sweep) errors.push_back("$.sweep: missing required key for command 'sweep'");
        break;
      case Command::asym:
        if (!c.asym) errors.push_back("$.asym: missing required key for command 'asym'");
        break;
      case Command::rationalize:
        if (!c.additive) errors.push_back("$.additive: missing required key for command 'rationalize'");
        break;
    }
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    throw SchemaError(msg);
  }

  if (c.game) detail::check_game(*c.game, "$.game");
  if (c.asym) detail::check_asym(*c.asym, "$.asym");
  if (c.additive) detail::check_additive(*c.additive, "$.additive");
  detail::check_numerics(c.numerics, "$.numerics");
  if (c.sweep) {
    static const std::set<std::string> allowed = {"alpha", "beta", "r", "N", "q"};
    if (!allowed.count(c.sweep->parameter))
      throw ValueError("$.sweep.parameter: expected one of alpha, beta, r, N, q");
    if (c.sweep->values.empty()) throw ValueError("$.sweep.values: must not be empty");
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

inline json serialize(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  if (c.game) j["game"] = detail::write_game(*c.game);
  if (c.asym) j["asym"] = detail::write_asym(*c.asym);
  if (c.additive) j["additive"] = detail::write_additive(*c.additive);
  j["numerics"] = detail::write_numerics(c.numerics);
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  return j;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return serialize(a) == serialize(b); }

}  // namespace oligo::cli
