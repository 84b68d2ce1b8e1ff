#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "oligo/additive_duopoly.hpp"
#include "oligo/asym_duopoly.hpp"
#include "oligo/cli/config.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/mpne_solver.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/symmetric_equiv.hpp"
#include "oligo/verifier.hpp"

namespace oligo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotRationalizable = 2;

struct RunResult {
  int exit_code = kExitOk;
  json report;
  std::vector<std::string> files;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::filesystem::path& p, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValueError("cannot open " + p.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << fmt17(r[i]);
    f << '\n';
  }
}

/// Parse a CSV written by write_csv back into its header and rows.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw ValueError("cannot open " + p.string());
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (std::getline(f, line)) header = split(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& c : split(line)) row.push_back(std::strtod(c.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

inline void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValueError("cannot open " + p.string() + " for writing");
  f << j.dump(2) << '\n';
}

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json empty_report(Command c) {
  json r;
  r["command"] = command_name(c);
  r["verdict"] = nullptr;
  r["constants"] = json::object();
  r["residuals"] = json::object();
  r["witnesses"] = json::array();
  r["provenance"] = json::object();
  r["notes"] = json::array();
  return r;
}

inline DeriveOptions derive_options(const NumericsConfig& n) {
  DeriveOptions o;
  o.rho = n.rho;
  o.C = n.C;
  o.u_ref = n.u_ref;
  o.work_range = n.work_range;
  o.x_range = n.x_range;
  o.x_points = n.grid;
  o.force_quadrature = n.force_quadrature;
  return o;
}

inline void add_profile_constants(json& rep, const GameSpec& g, const RiskProfile& p) {
  auto& k = rep["constants"];
  k["N"] = g.N;
  k["r"] = g.r;
  if (p.eta1) k["eta1"] = *p.eta1;
  if (p.eta2) k["eta2"] = *p.eta2;
  k["CI"] = number_or_null(competition_index(p, g.N, 1.0));
  if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    try {
      const auto o = cobb_douglas_oracle(cd->alpha, cd->beta, g.N, g.r, 0.0);
      k["CI_oracle"] = o.CI;
      k["c_oracle"] = o.c;
    } catch (const ParameterError& e) {
      rep["notes"].push_back(std::string("closed-form oracle unavailable: ") + e.what());
    }
  }
}

inline void add_monopoly(json& rep, const MonopolyProblem& oc) {
  auto& k = rep["constants"];
  k["rho"] = oc.rho;
  k["C"] = oc.C;
  k["u_ref"] = oc.u_ref;
  if (oc.m) k["m"] = *oc.m;
  if (oc.k_f) k["k_f"] = *oc.k_f;
  auto& pv = rep["provenance"];
  pv["f"] = provenance_name(oc.f.provenance());
  pv["gamma"] = provenance_name(oc.gamma.provenance());
  pv["ell"] = provenance_name(oc.ell.provenance());
  if (oc.bequest) pv["bequest"] = provenance_name(oc.bequest->provenance());
  for (const auto& n : oc.notes) rep["notes"].push_back(n);
}

inline std::vector<std::vector<double>> monopoly_rows(const MonopolyProblem& oc, const std::vector<double>& us) {
  std::vector<std::vector<double>> rows;
  rows.reserve(us.size());
  for (double u : us) rows.push_back({u, oc.f(u), oc.gamma(u), oc.ell(u)});
  return rows;
}

inline void emit_monopoly_curves(RunResult& res, const std::filesystem::path& out, const MonopolyProblem& oc,
                                 const std::vector<double>& us) {
  write_csv(out / "curves.csv", {"u", "f", "gamma", "ell"}, monopoly_rows(oc, us));
  res.files.push_back("curves.csv");
  if (oc.bequest) {
    const auto dom = oc.bequest->domain();
    std::vector<std::vector<double>> rows;
    for (double x : numerics::linspace(dom.lo, dom.hi, us.size())) rows.push_back({x, (*oc.bequest)(x)});
    write_csv(out / "bequest.csv", {"x", "b"}, rows);
    res.files.push_back("bequest.csv");
  }
}

inline FeedbackStrategy solve_mpne(const GameSpec& g, const RiskProfile& p, const NumericsConfig& n) {
  const auto xs = numerics::linspace(n.x_range.lo, n.x_range.hi, n.grid);
  if (!g.finite()) {
    StationaryOptions so;
    if (g.r == 0.0) so.seed_rate = n.u_ref;
    return stationary_mpne(g, p, xs, so);
  }
  // feet of the characteristics drift below the output stocks, so the terminal grid reaches further down
  const auto launch = numerics::logspace(n.x_range.lo * 1e-2, n.x_range.hi * 2.0, 4 * n.grid);
  const TerminalMap phi = terminal_strategy(g, launch);
  const double T = g.finite_horizon().T;
  const auto ts = numerics::linspace(0.0, T, std::max<std::size_t>(5, n.grid / 5));
  return characteristics_mpne(g, p, phi, ts, xs);
}

inline void emit_strategy(RunResult& res, const std::filesystem::path& out, const FeedbackStrategy& s) {
  std::vector<std::vector<double>> rows;
  if (s.stationary()) {
    const Curve& c = s.curve();
    for (double x : c.nodes()) rows.push_back({x, c(x)});
    write_csv(out / "strategy.csv", {"x", "u"}, rows);
  } else {
    const auto& g = s.grid();
    for (std::size_t i = 0; i < g.t.size(); ++i)
      for (std::size_t j = 0; j < g.x.size(); ++j) rows.push_back({g.t[i], g.x[j], g.u[i][j]});
    write_csv(out / "strategy.csv", {"t", "x", "u"}, rows);
  }
  res.files.push_back("strategy.csv");
}

inline json residual_json(const ResidualNorms& r) {
  return {{"sup", number_or_null(r.sup)},
          {"l2", number_or_null(r.l2)},
          {"worst_t", number_or_null(r.worst_t)},
          {"worst_x", number_or_null(r.worst_x)},
          {"nodes", r.nodes},
          {"degenerate", r.degenerate}};
}

inline std::vector<double> work_grid(const NumericsConfig& n) {
  return numerics::logspace(n.work_range.lo, n.work_range.hi, n.grid);
}

inline RunResult run_derive(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const GameSpec& g = *c.game;
  const auto p = in_stage("reduce", [&] { return symmetric_reduce(g); });
  const auto oc = in_stage("derive", [&] { return derive_monopoly(g, derive_options(c.numerics)); });
  add_profile_constants(res.report, g, p);
  add_monopoly(res.report, oc);
  const auto idn = identification_check(p, oc, g.N);
  const auto us = numerics::logspace(oc.work_range.lo, oc.work_range.hi, 50);
  auto& rs = res.report["residuals"];
  rs["identification_f"] = idn.f_defect;
  rs["identification_gamma"] = idn.gamma_defect;
  rs["foc"] = foc_defect(oc.ell, oc.f, oc.gamma, std::vector<double>(us.begin() + 15, us.begin() + 35));
  res.report["verdict"] = "Derived";
  emit_monopoly_curves(res, out, oc, work_grid(c.numerics));
  write_json(out / "monopoly.json", res.report);
  res.files.push_back("monopoly.json");
  return res;
}

inline RunResult run_mpne(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const GameSpec& g = *c.game;
  const auto p = in_stage("reduce", [&] { return symmetric_reduce(g); });
  const auto s = in_stage("mpne", [&] { return solve_mpne(g, p, c.numerics); });
  add_profile_constants(res.report, g, p);
  res.report["provenance"]["strategy"] = s.provenance;
  res.report["residuals"]["game_pde"] = residual_json(game_pde_residual(s, g, p));
  res.report["verdict"] = "Solved";
  emit_strategy(res, out, s);
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline RunResult run_verify(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const GameSpec& g = *c.game;
  const auto p = in_stage("reduce", [&] { return symmetric_reduce(g); });
  const auto oc = in_stage("derive", [&] { return derive_monopoly(g, derive_options(c.numerics)); });
  const auto s = in_stage("mpne", [&] { return solve_mpne(g, p, c.numerics); });
  VerifyOptions vo;
  if (c.numerics.tol) vo.thresholds = Thresholds{*c.numerics.tol, 100.0 * *c.numerics.tol};
  const auto rep = in_stage("verify", [&] { return verify(g, p, oc, s, vo); });
  add_profile_constants(res.report, g, p);
  add_monopoly(res.report, oc);
  res.report["verdict"] = verdict_name(rep.verdict);
  auto& rs = res.report["residuals"];
  rs["control_pde"] = residual_json(rep.control_pde);
  rs["game_pde"] = residual_json(game_pde_residual(s, g, p));
  rs["identification_f"] = rep.identification.f_defect;
  rs["identification_gamma"] = rep.identification.gamma_defect;
  rs["foc"] = rep.foc;
  rs["concavity_ok"] = rep.concavity_ok;
  rs["thresholds"] = {{"equivalent", rep.thresholds.equivalent}, {"not_equivalent", rep.thresholds.not_equivalent}};
  res.report["provenance"]["strategy"] = s.provenance;
  res.report["provenance"]["path"] = rep.path;
  for (const auto& cs : rep.concavity) {
    if (cs.sign >= 0) res.report["witnesses"].push_back({{"x", cs.x}, {"u", cs.u}, {"h_uu", cs.value}});
  }
  for (const auto& n : rep.notes) res.report["notes"].push_back(n);
  emit_monopoly_curves(res, out, oc, work_grid(c.numerics));
  emit_strategy(res, out, s);
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline RunResult run_ci(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const GameSpec& g = *c.game;
  const auto p = in_stage("reduce", [&] { return symmetric_reduce(g); });
  add_profile_constants(res.report, g, p);
  res.report["provenance"]["CI"] = p.linear() ? "closed_form" : provenance_name(p.e1.provenance());
  res.report["verdict"] = "Computed";
  std::vector<std::vector<double>> rows;
  for (double u : work_grid(c.numerics)) rows.push_back({u, competition_index(p, g.N, u)});
  write_csv(out / "ci.csv", {"u", "CI"}, rows);
  res.files.push_back("ci.csv");
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline RunResult run_asym(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const AsymParams& ap = *c.asym;
  const double delta = in_stage("delta", [&] { return solve_delta(ap); });
  const double xi = asym_xi(ap, delta);
  const double rho = c.numerics.rho.value_or(ap.default_rho());
  const double C = c.numerics.C.value_or(xi < 0.0 ? 1.0 : -1.0);
  const auto oc = in_stage("fictitious", [&] { return asym_fictitious(ap, delta, rho, C, c.numerics.u_ref); });
  auto& k = res.report["constants"];
  k["delta"] = delta;
  k["xi"] = xi;
  k["epsilon"] = ap.epsilon();
  k["c"] = asym_mpne_slope(ap, delta);
  k["rho"] = rho;
  k["C"] = C;
  k["m"] = *oc.m;
  auto& rs = res.report["residuals"];
  rs["delta_ratio"] = delta_ratio_residual(ap, delta);
  double theta_res = 0.0, row = 0.0;
  const double cslope = asym_mpne_slope(ap, delta);
  for (double u : {0.5, 1.0, 2.0}) {
    theta_res = std::max(theta_res, theta_ratio_residual(ap, delta, u));
    const auto rr = asym_row_residual(ap, delta, u, cslope);
    row = std::max({row, rr.row1, rr.row2});
  }
  rs["theta_ratio"] = theta_res;
  rs["rows"] = row;
  add_monopoly(res.report, oc);
  res.report["verdict"] = "Derived";
  emit_monopoly_curves(res, out, oc, work_grid(c.numerics));
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline RunResult run_rationalize(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const AdditiveConfig& a = *c.additive;
  const auto rep = in_stage("rationalize", [&] {
    return rationalizability_test(a.spec, a.box1, a.box2, std::min<std::size_t>(c.numerics.grid, 50));
  });
  res.report["verdict"] = rationalizability_name(rep.verdict);
  auto& k = res.report["constants"];
  k["positive"] = rep.positive;
  k["negative"] = rep.negative;
  k["zero"] = rep.zero;
  k["min_discriminant"] = rep.min_discriminant;
  k["max_discriminant"] = rep.max_discriminant;
  for (const auto& w : rep.witnesses)
    res.report["witnesses"].push_back({{"u1", w.u1}, {"u2", w.u2}, {"discriminant", w.discriminant}});
  if (rep.degenerate_flag) {
    res.report["notes"].push_back("zero discriminant sampled: degenerate points present");
    for (const auto& w : rep.degenerate)
      res.report["degenerate"].push_back({{"u1", w.u1}, {"u2", w.u2}});
  }
  if (rep.verdict == Rationalizability::NotRationalizable) {
    res.exit_code = kExitNotRationalizable;
  } else if (rep.verdict == Rationalizability::Candidate) {
    const double uc = a.box1.mid(), vc = a.box2.mid();
    const auto e = eigen_pair(a.spec, uc, vc);
    k["lambda"] = e.lambda;
    k["mu"] = e.mu;
    k["eigen_at"] = json::array({uc, vc});
    const auto anchor = a.anchor.value_or(std::make_pair(a.range.mid(), a.range.mid()));
    ThetaOptions to;
    to.convention = c.numerics.convention;
    to.points = c.numerics.grid;
    Curve theta;
    try {
      theta = theta_ode(a.spec, c.numerics.branch, anchor, a.range, to);
    } catch (const Error& err) {
      res.report["notes"].push_back(std::string("theta not integrated: ") + err.kind_name().data() + ": " + err.what());
      write_json(out / "report.json", res.report);
      res.files.push_back("report.json");
      return res;
    }
    std::vector<std::vector<double>> rows;
    for (double u : theta.nodes()) rows.push_back({u, theta(u)});
    write_csv(out / "theta.csv", {"u", "theta"}, rows);
    res.files.push_back("theta.csv");
    res.report["provenance"]["theta"] = "ODE";
    res.report["constants"]["branch"] = branch_name(c.numerics.branch);
    if (!a.spec.B1.is_zero() && !a.spec.B2.is_zero()) {
      try {
        const auto xs = numerics::linspace(c.numerics.x_range.lo, c.numerics.x_range.hi, 21);
        const auto link = bequest_link_check(a.spec, theta, xs);
        res.report["residuals"]["bequest_link"] = link.defect;
        res.report["residuals"]["bequest_link_ok"] = link.ok;
      } catch (const Error& err) {
        res.report["notes"].push_back(std::string("bequest link not checked: ") + err.what());
      }
      try {
        AdditiveOcOptions oo;
        oo.points = c.numerics.grid;
        const auto built = construct_additive_oc(a.spec, theta, c.numerics.branch, oo);
        res.report["construction"] = {{"status", "built"},
                                      {"bequest_shape", bequest_shape_name(built.shape)},
                                      {"rho", built.problem.rho}};
        emit_monopoly_curves(res, out, built.problem, theta.nodes());
      } catch (const Error& err) {
        res.report["construction"] = {{"status", "failed"}, {"error", std::string(err.kind_name())},
                                      {"message", err.what()}};
      }
    }
  }
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline GameSpec with_parameter(GameSpec g, const std::string& name, double v) {
  if (name == "r") {
    g.r = v;
  } else if (name == "N") {
    g.N = static_cast<int>(std::lround(v));
  } else if (auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
    if (name == "alpha") cd->alpha = v;
    else if (name == "beta") cd->beta = v;
    else throw ValueError("parameter '" + name + "' does not apply to cobb_douglas");
  } else if (auto* ip = std::get_if<IsoelasticPricing>(&g.utility)) {
    if (name == "q") ip->q = v;
    else throw ValueError("parameter '" + name + "' does not apply to isoelastic_pricing");
  } else {
    throw ValueError("parameter '" + name + "' does not apply to this family");
  }
  return g;
}

struct SweepRow {
  double value = 0.0;
  double ci = std::numeric_limits<double>::quiet_NaN();
  double ci_oracle = std::numeric_limits<double>::quiet_NaN();
  double eta1 = std::numeric_limits<double>::quiet_NaN();
  double eta2 = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline SweepRow sweep_item(const GameSpec& base, const std::string& name, double v) {
  SweepRow row;
  row.value = v;
  try {
    const GameSpec g = with_parameter(base, name, v);
    const auto p = symmetric_reduce(g);
    row.ci = competition_index(p, g.N, 1.0);
    if (p.eta1) row.eta1 = *p.eta1;
    if (p.eta2) row.eta2 = *p.eta2;
    if (const auto* cd = std::get_if<CobbDouglas>(&g.utility)) {
      row.ci_oracle = cobb_douglas_oracle(cd->alpha, cd->beta, g.N, g.r, 0.0).CI;
    }
  } catch (const Error& e) {
    row.error = std::string(e.kind_name());
  }
  return row;
}

inline RunResult run_sweep(const RunConfig& c, const std::filesystem::path& out) {
  RunResult res;
  res.report = empty_report(c.command);
  const auto& sw = *c.sweep;
  const GameSpec base = *c.game;
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(sw.values.size());
  for (double v : sw.values) jobs.push_back(std::async(std::launch::async, sweep_item, base, sw.parameter, v));
  std::vector<std::vector<double>> rows;
  std::size_t failed = 0;
  for (auto& j : jobs) {
    const SweepRow r = j.get();
    rows.push_back({r.value, r.ci, r.ci_oracle, r.eta1, r.eta2});
    if (!r.error.empty()) {
      ++failed;
      res.report["notes"].push_back(sw.parameter + " = " + fmt17(r.value) + ": " + r.error);
    }
  }
  write_csv(out / "sweep.csv", {sw.parameter, "CI", "CI_oracle", "eta1", "eta2"}, rows);
  res.files.push_back("sweep.csv");
  res.report["constants"]["items"] = rows.size();
  res.report["constants"]["failed"] = failed;
  res.report["verdict"] = failed == 0 ? "Computed" : "Partial";
  write_json(out / "report.json", res.report);
  res.files.push_back("report.json");
  return res;
}

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace detail

inline json error_json(const std::exception& e) {
  json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["error"] = std::string(err->kind_name());
    j["message"] = err->what();
    j["where"] = detail::number_or_null(err->where());
    j["stage"] = err->stage();
  } else {
    j["error"] = "InternalError";
    j["message"] = e.what();
    j["where"] = nullptr;
    j["stage"] = "";
  }
  return j;
}

/// Execute one configured run; artifacts go to `out`, errors to out/error.json.
inline RunResult run(const RunConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  RunResult res;
  try {
    switch (c.command) {
      case Command::derive: res = detail::run_derive(c, out); break;
      case Command::mpne: res = detail::run_mpne(c, out); break;
      case Command::verify: res = detail::run_verify(c, out); break;
      case Command::ci: res = detail::run_ci(c, out); break;
      case Command::asym: res = detail::run_asym(c, out); break;
      case Command::rationalize: res = detail::run_rationalize(c, out); break;
      case Command::sweep: res = detail::run_sweep(c, out); break;
    }
  } catch (const std::exception& e) {
    res = {};
    res.exit_code = kExitError;
    res.report = error_json(e);
    write_json(out / "error.json", res.report);
    res.files.push_back("error.json");
  }
  std::ofstream log(out / "run.log", std::ios::app);
  log << detail::timestamp() << " command=" << command_name(c.command) << " exit=" << res.exit_code << '\n';
  return res;
}

}  // namespace oligo::cli
