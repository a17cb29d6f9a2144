#pragma once

// The four CLI commands. Each returns an exit code or throws; guarded()
// maps exceptions to the documented codes.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace qtraj {

enum ExitCode : int {
  kExitOk = 0,
  kExitToleranceFailed = 1,
  kExitConfigError = 2,
  kExitDimensionCap = 3,
  kExitNumericalFailure = 4,
};

struct SimulateOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides output.directory
  std::optional<int> workers;                       // overrides QTRAJ_WORKERS
};

int cmd_simulate(const std::filesystem::path& config, const SimulateOptions& options, std::ostream& log);
int cmd_master(const std::filesystem::path& config, const SimulateOptions& options, std::ostream& log);
// Prints a JSON report; exit 1 when a tolerance is exceeded. The tolerance
// spec is "x" or "default=x,<column>=y,trace_distance=z".
int cmd_compare(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                const std::optional<std::string>& tolerance, std::ostream& out);
// Ensemble statistics of one column, as JSON.
int cmd_analyze(const std::filesystem::path& dir, const std::string& observable, std::ostream& out);

int guarded(const std::function<int()>& command, std::ostream& err);

}  // namespace qtraj
