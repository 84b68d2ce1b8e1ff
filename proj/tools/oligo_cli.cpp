#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oligo/cli/config.hpp"
#include "oligo/cli/run.hpp"

int main(int argc, char** argv) {
  using namespace oligo;
  CLI::App app{"oligo: fictitious monopolies for differential oligopoly games"};
  std::string config_path;
  std::string out_dir = "./out";
  std::optional<double> tol, rho;
  std::optional<std::size_t> grid;
  std::optional<std::string> branch;
  bool seedless = false;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--tol", tol, "verifier equivalence threshold")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "grid size for curves and stock grids")->check(CLI::Range(5, 100000));
  app.add_option("--branch", branch, "eigen branch for the additive duopoly")->check(CLI::IsMember({"plus", "minus"}));
  app.add_option("--rho", rho, "discount rate of the fictitious monopoly")->check(CLI::NonNegativeNumber);
  app.add_flag("--seedless", seedless, "deterministic mode (always on)");
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path out(out_dir);
  try {
    std::ifstream in(config_path);
    if (!in) throw ValueError("cannot read config file " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cli::RunConfig cfg = cli::parse_config(ss.str());
    if (tol) cfg.numerics.tol = *tol;
    if (grid) cfg.numerics.grid = *grid;
    if (rho) cfg.numerics.rho = *rho;
    if (branch) cfg.numerics.branch = *branch == "plus" ? Branch::plus : Branch::minus;
    const auto res = cli::run(cfg, out);
    if (res.exit_code == cli::kExitError) {
      std::cerr << res.report.dump() << '\n';
    } else {
      std::cout << "verdict: " << res.report["verdict"].dump() << '\n';
      for (const auto& f : res.files) std::cout << (out / f).string() << '\n';
    }
    return res.exit_code;
  } catch (const std::exception& e) {
    std::filesystem::create_directories(out);
    const auto j = cli::error_json(e);
    cli::write_json(out / "error.json", j);
    std::cerr << j.dump() << '\n';
    return cli::kExitError;
  }
}
