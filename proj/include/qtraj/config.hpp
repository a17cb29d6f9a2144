#pragma once

// Run configuration: a YAML file with model, probe, engine, init,
// observables and output sections.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtraj/observables.hpp"
#include "qtraj/probe.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

// Invalid configuration; the message carries "file:line:col:" when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSection {
  Species species = Species::Boson;
  LatticeSpec lattice;
  ParticleContent content;
};

struct ProbeSection {
  std::optional<DiagonalProfile> diagonal;    // J_jj
  std::optional<InterSiteProfile> intersite;  // J_ij
  SiteQuantity quantity = SiteQuantity::Density;
  MeasurementStrength strength;
  // Any of D, B, D+B, Dx, Dy.
  std::vector<std::string> channels;
};

struct InitSection {
  enum class Kind { GroundState, Fock, File };
  Kind kind = Kind::GroundState;
  std::vector<std::uint8_t> occupation;
  std::filesystem::path file;
};

// One requested output. `of` names an operator: D, B, Dx, Dy, H0, kinetic,
// N_odd, N_even, n_<site>, or zone (with `sites`).
struct ObservableSpec {
  std::string kind;  // densities, mean, variance, correlation, distribution, entropy, imbalance
  std::string name;
  std::string of;
  std::vector<int> sites;
  std::vector<int> zone_a, zone_b;
  std::optional<std::vector<int>> partition;  // site -> mode; odd/even if empty
  bool partition_from_profile = false;
  int mode = 0;
};

struct OutputSection {
  std::filesystem::path directory = "qtraj-out";
  bool write_density = false;
};

struct RunConfig {
  ModelSection model;
  ProbeSection probe;
  EngineConfig engine;
  JumpMode branch = JumpMode::Stochastic;
  std::size_t n_traj = 1;
  std::size_t dimension_cap = kTrajectoryDimensionCap;
  std::size_t master_dimension_cap = kMasterDimensionCap;
  InitSection init;
  std::vector<ObservableSpec> observables;
  OutputSection output;

  std::string source_text;  // verbatim file contents
  std::string canonical;    // sorted-key JSON with normalised numbers
  std::string hash;         // SHA-256 hex of `canonical`
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

// Canonical JSON of a YAML document: sorted keys, every numeric scalar as a
// double in shortest round-trip form.
std::string canonical_json(const std::string& yaml_text);
std::string sha256_hex(const std::string& data);

// Operators, channels, initial state and observables built from a config.
struct Problem {
  BasisPtr basis;
  SparseOperator h0;
  std::vector<JumpChannel> channels;
  Vec psi0;
  ObservableSet observables;
};
Problem build_problem(const RunConfig& config, std::size_t dimension_cap);

}  // namespace qtraj
