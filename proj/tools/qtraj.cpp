#include <CLI11.hpp>

#include <iostream>

#include "qtraj/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum trajectories of ultracold atoms under cavity measurement"};
  app.require_subcommand(1);

  qtraj::SimulateOptions sim;
  std::string config;
  std::string out_dir;
  int workers = 0;

  auto* simulate = app.add_subcommand("simulate", "Run the trajectory ensemble of a config");
  simulate->add_option("config", config, "YAML run configuration")->required();
  simulate->add_option("--out", out_dir, "Artifact directory (overrides output.directory)");
  simulate->add_option("--workers", workers, "Worker threads (overrides QTRAJ_WORKERS)")->check(CLI::PositiveNumber);

  auto* master = app.add_subcommand("master", "Integrate the Lindblad master equation of a config");
  master->add_option("config", config, "YAML run configuration")->required();
  master->add_option("--out", out_dir, "Artifact directory (overrides output.directory)");

  std::string dir_a, dir_b, tol;
  auto* compare = app.add_subcommand("compare", "Compare two artifact directories");
  compare->add_option("dirA", dir_a)->required();
  compare->add_option("dirB", dir_b)->required();
  compare->add_option("--tol", tol, "x, or default=x,<column>=y,trace_distance=z");

  std::string dir, observable;
  auto* analyze = app.add_subcommand("analyze", "Ensemble statistics of one observable column");
  analyze->add_option("dir", dir)->required();
  analyze->add_option("--observable", observable)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qtraj::kExitConfigError;
  }

  if (!out_dir.empty()) sim.output_dir = out_dir;
  if (workers > 0) sim.workers = workers;

  return qtraj::guarded(
      [&]() -> int {
        if (simulate->parsed()) return qtraj::cmd_simulate(config, sim, std::cerr);
        if (master->parsed()) return qtraj::cmd_master(config, sim, std::cerr);
        if (compare->parsed()) {
          return qtraj::cmd_compare(dir_a, dir_b, tol.empty() ? std::nullopt : std::optional(tol), std::cout);
        }
        return qtraj::cmd_analyze(dir, observable, std::cout);
      },
      std::cerr);
}
