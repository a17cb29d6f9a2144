#pragma once

#include <span>
#include <string>
#include <vector>

#include "qtraj/probe.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

// Assignment of lattice sites to spatial modes, e.g. odd/even sites or
// illuminated/dark zones.
struct ModePartition {
  int modes = 0;
  std::vector<int> assignment;  // site -> mode in [0, modes)

  static ModePartition from_assignment(std::vector<int> assignment);
  // Mode 0 holds odd labels (indices 0, 2, ...), mode 1 the rest.
  static ModePartition odd_even(int sites);
  // Sites with equal coefficients share a mode; modes are numbered in order
  // of first appearance.
  static ModePartition from_profile(const DiagonalProfile& profile, double tol = 1e-12);

  std::vector<int> sites_of(int mode) const;
};

// sum of n_j over the given sites (diagonal).
SparseOperator zone_number_op(const BasisPtr& basis, std::span<const int> sites);
SparseOperator mode_number_op(const BasisPtr& basis, const ModePartition& partition, int mode);

// Re <psi|A|psi> for normalised psi.
double expectation(const SparseOperator& a, const Vec& psi);
// <A^+ A> - |<A>|^2.
double variance(const SparseOperator& a, const Vec& psi);

// p(N_l = m) for m = 0..N.
std::vector<double> mode_number_distribution(const Vec& psi, const FockBasis& basis, const ModePartition& partition,
                                             int mode);
// <N_A N_B> - <N_A><N_B> for disjoint zones.
double number_correlations(const Vec& psi, const FockBasis& basis, std::span<const int> zone_a,
                           std::span<const int> zone_b);
// Von Neumann entropy (nats) of the reduced state on sites_a.
double entanglement_entropy(const Vec& psi, const FockBasis& basis, std::span<const int> sites_a);
// (<N_1> - <N_2>) / N for a two-mode partition.
double imbalance(const Vec& psi, const FockBasis& basis, const ModePartition& partition);
std::vector<double> site_densities(const Vec& psi, const FockBasis& basis);

// Named scalar columns evaluated on a pure state or a density matrix.
class ObservableSet {
 public:
  explicit ObservableSet(BasisPtr basis) : basis_(std::move(basis)) {}

  // Real part, plus an "_im" column when the operator is not Hermitian.
  void add_mean(const std::string& name, const SparseOperator& op);
  void add_variance(const std::string& name, const SparseOperator& op);
  // Re<AB> - <A><B> for Hermitian A, B.
  void add_covariance(const std::string& name, const SparseOperator& a, const SparseOperator& b);
  // NaN on density matrices.
  void add_entropy(const std::string& name, std::vector<int> sites_a);

  // Columns n_0 .. n_{L-1}.
  void add_site_densities();
  // Columns <prefix>_0 .. <prefix>_N holding p(N_l = m).
  void add_mode_distribution(const std::string& prefix, const ModePartition& partition, int mode);

  const std::vector<std::string>& columns() const { return columns_; }
  std::vector<double> evaluate(const Vec& psi) const;
  std::vector<double> evaluate(const DenseMatrix& rho) const;

 private:
  enum class Kind { MeanRe, MeanIm, Variance, Covariance, Entropy };
  struct Entry {
    Kind kind;
    SparseOperator a;
    SparseOperator b;
    SparseOperator product;  // A^+A for Variance, AB for Covariance
    std::vector<int> sites;
  };
  void push(std::string name, Entry entry);

  BasisPtr basis_;
  std::vector<std::string> columns_;
  std::vector<Entry> entries_;
};

// Time series of one run (a trajectory or the master equation).
struct RunRecord {
  std::string traj_id;
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[time][column]
  std::vector<JumpEvent> jumps;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};

struct EnsembleSeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;  // NaN for a single run
  std::size_t runs = 0;
};

// Mean over runs of one column; runs must share the time grid.
EnsembleSeries ensemble_mean(std::span<const RunRecord> runs, const std::string& column);
// Trajectory-averaged variance <sigma^2_D>_traj: the ensemble mean of a
// per-trajectory variance column.
EnsembleSeries traj_avg_variance(std::span<const RunRecord> runs, const std::string& variance_column);

struct WindowMean {
  double mean = 0.0;
  double std_error = 0.0;
};
// Mean over the final `fraction` of the time window (the long-time value).
WindowMean late_window_mean(const EnsembleSeries& series, double fraction = 0.25);

}  // namespace qtraj
