#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oligo/cli/config.hpp"
#include "oligo/cli/run.hpp"

using namespace oligo;
using namespace oligo::cli;
namespace fs = std::filesystem;

namespace {

RunConfig demo_config(const std::string& name) {
  std::ifstream in(std::string(OLIGO_DEMO_DIR) + "/configs/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("oligo_run_test_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST(Csv, RoundTripIsExact) {
  const auto d = fresh_dir("csv");
  fs::create_directories(d);
  const std::vector<std::vector<double>> rows{{0.1, 1.0 / 3.0, -2.5e-300}, {std::exp(1.0), 1e17, 0.0}};
  write_csv(d / "t.csv", {"a", "b", "c"}, rows);
  const auto [h, back] = read_csv(d / "t.csv");
  EXPECT_EQ(h, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back[i][j], rows[i][j]);
  EXPECT_EQ(slurp(d / "t.csv").find('\r'), std::string::npos);
}

TEST(Run, DeriveWritesCurvesMatchingTheLibrary) {
  const auto c = demo_config("cd_derive.json");
  const auto d = fresh_dir("derive");
  const auto res = run(c, d);
  ASSERT_EQ(res.exit_code, kExitOk);
  EXPECT_EQ(res.report["verdict"], "Derived");
  EXPECT_TRUE(fs::exists(d / "monopoly.json"));
  EXPECT_TRUE(fs::exists(d / "run.log"));
  const auto oc = derive_monopoly(*c.game, cli::detail::derive_options(c.numerics));
  const auto [h, rows] = read_csv(d / "curves.csv");
  EXPECT_EQ(h, (std::vector<std::string>{"u", "f", "gamma", "ell"}));
  ASSERT_EQ(rows.size(), c.numerics.grid);
  for (const auto& r : rows) {
    EXPECT_NEAR(r[1], oc.f(r[0]), 1e-12 * std::max(1.0, std::abs(r[1])));
    EXPECT_NEAR(r[2], oc.gamma(r[0]), 1e-12 * std::max(1.0, std::abs(r[2])));
    EXPECT_NEAR(r[3], oc.ell(r[0]), 1e-12 * std::max(1.0, std::abs(r[3])));
  }
  const auto rep = load_json(d / "monopoly.json");
  EXPECT_NEAR(rep["constants"]["k_f"].get<double>(), -0.75, 1e-15);
  EXPECT_NEAR(rep["constants"]["m"].get<double>(), 0.4, 1e-15);
  for (const char* key : {"command", "verdict", "constants", "residuals", "witnesses", "provenance", "notes"})
    EXPECT_TRUE(rep.contains(key)) << key;
}

TEST(Run, OutputsAreByteIdenticalAcrossRuns) {
  for (const char* name : {"cd_verify.json", "cd_finite_mpne.json", "beta_sweep.json", "additive_candidate.json"}) {
    const auto c = demo_config(name);
    const auto a = fresh_dir(std::string("det_a_") + name), b = fresh_dir(std::string("det_b_") + name);
    const auto ra = run(c, a), rb = run(c, b);
    ASSERT_EQ(ra.exit_code, rb.exit_code) << name;
    ASSERT_EQ(ra.files, rb.files) << name;
    for (const auto& f : ra.files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << name << " " << f;
  }
}

TEST(Run, VerifyReportsEquivalence) {
  const auto d = fresh_dir("verify");
  const auto res = run(demo_config("cd_verify.json"), d);
  ASSERT_EQ(res.exit_code, kExitOk);
  const auto rep = load_json(d / "report.json");
  EXPECT_EQ(rep["verdict"], "Equivalent");
  EXPECT_EQ(rep["provenance"]["path"], "closed_form");
  EXPECT_LT(rep["residuals"]["control_pde"]["sup"].get<double>(), 1e-6);
  const auto [h, rows] = read_csv(d / "strategy.csv");
  for (const auto& r : rows) EXPECT_NEAR(r[1], r[0] / 6.0, 1e-9);
}

TEST(Run, TightToleranceChangesVerdict) {
  auto c = demo_config("cd_verify.json");
  c.numerics.tol = 1e-300;
  const auto res = run(c, fresh_dir("verify_tight"));
  EXPECT_NE(res.report["verdict"], "Equivalent");
}

TEST(Run, SweepMatchesOracle) {
  const auto d = fresh_dir("sweep");
  const auto c = demo_config("beta_sweep.json");
  const auto res = run(c, d);
  ASSERT_EQ(res.exit_code, kExitOk);
  const auto [h, rows] = read_csv(d / "sweep.csv");
  ASSERT_EQ(rows.size(), c.sweep->values.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][0], c.sweep->values[i]);
    const double beta = rows[i][0];
    // ((N−1)/N)(η1 − η2) with k = −0.6 + (1 − β)
    const double k = -0.6 + (1.0 - beta);
    const double ci = 0.5 * (-1.0 / k + ((1.0 - beta) / 0.4) / k);
    EXPECT_NEAR(rows[i][1], ci, 1e-13);
    EXPECT_NEAR(rows[i][1], rows[i][2], 1e-13);
  }
}

TEST(Run, SweepRecordsFailedItems) {
  auto c = demo_config("beta_sweep.json");
  c.sweep->values = {0.8, 0.4};  // β = 0.4 gives k = 0
  const auto d = fresh_dir("sweep_partial");
  const auto res = run(c, d);
  EXPECT_EQ(res.exit_code, kExitOk);
  EXPECT_EQ(res.report["verdict"], "Partial");
  const auto [h, rows] = read_csv(d / "sweep.csv");
  EXPECT_TRUE(std::isnan(rows[1][1]));
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(run(demo_config("positive_externality.json"), fresh_dir("pe")).exit_code, kExitNotRationalizable);
  EXPECT_EQ(run(demo_config("additive_candidate.json"), fresh_dir("cand")).exit_code, kExitOk);
  EXPECT_EQ(run(demo_config("asym.json"), fresh_dir("asym")).exit_code, kExitOk);
}

TEST(Run, NotRationalizableListsWitnesses) {
  const auto d = fresh_dir("pe_w");
  run(demo_config("positive_externality.json"), d);
  const auto rep = load_json(d / "report.json");
  EXPECT_EQ(rep["verdict"], "NotRationalizable");
  ASSERT_FALSE(rep["witnesses"].empty());
  EXPECT_LT(rep["witnesses"][0]["discriminant"].get<double>(), 0.0);
}

TEST(Run, LibraryErrorsGoToErrorJson) {
  auto c = demo_config("cd_derive.json");
  c.numerics.rho = 0.0;  // infinite horizon needs ρ > 0
  const auto d = fresh_dir("err");
  const auto res = run(c, d);
  EXPECT_EQ(res.exit_code, kExitError);
  const auto err = load_json(d / "error.json");
  EXPECT_EQ(err["error"], "ParameterError");
  EXPECT_EQ(err["stage"], "derive");
  EXPECT_TRUE(err.contains("where"));
}

TEST(Run, AsymReportMatchesLibrary) {
  const auto d = fresh_dir("asym_rep");
  const auto c = demo_config("asym.json");
  run(c, d);
  const auto rep = load_json(d / "report.json");
  EXPECT_NEAR(rep["constants"]["delta"].get<double>(), solve_delta(*c.asym), 0.0);
  EXPECT_LT(rep["residuals"]["rows"].get<double>(), 1e-12);
}
