#pragma once

// Artifact directory layout and the CSV/JSON formats read by compare,
// analyze and the plotting scripts.
//
//   config.yaml     verbatim copy of the run configuration
//   manifest.json   config_hash, seed, n_traj, schema_version, jump_counts,
//                   wall_seconds (+ command, dimension, columns)
//   traj_<id>.csv   time, traj_id, <observable columns...>
//   aggregate.csv   same columns; traj_id is "mean" or "stderr"
//   jumps.csv       traj_id, time, channel, norm_residual
//   master.csv      master-equation series, traj_id = "master"
//   density.csv     time, traj_id, re_<i>_<j>, im_<i>_<j> (row-major)

#include <filesystem>
#include <string>
#include <vector>

#include "qtraj/observables.hpp"

namespace qtraj {

inline constexpr int kSchemaVersion = 1;

// Full precision, scientific notation; "nan" for NaN.
std::string format_double(double v);

void write_series_csv(const std::filesystem::path& path, const RunRecord& run);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                         const std::vector<EnsembleSeries>& series);
void write_jump_log(const std::filesystem::path& path, const std::vector<RunRecord>& runs,
                    const std::vector<std::string>& channel_labels);
void write_density_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<DenseMatrix>& rhos, const std::string& traj_id);

// A CSV in the time, traj_id, ... schema.
struct CsvTable {
  std::vector<std::string> columns;  // observable columns only
  std::vector<double> times;
  std::vector<std::string> traj_ids;
  std::vector<std::vector<double>> values;  // values[row][column]

  // Rows with the given traj_id as a RunRecord.
  RunRecord select(const std::string& traj_id) const;
};
CsvTable read_csv(const std::filesystem::path& path);

// traj_<id>.csv files of a simulate directory, sorted by id.
std::vector<RunRecord> read_trajectories(const std::filesystem::path& dir);
// Density matrices from density.csv.
std::vector<DenseMatrix> read_density_csv(const std::filesystem::path& path, std::vector<double>& times);

}  // namespace qtraj
