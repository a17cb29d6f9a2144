#pragma once

// Parallel fan-out of independent trajectories.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qtraj/observables.hpp"

namespace qtraj {

inline constexpr const char* kWorkersEnv = "QTRAJ_WORKERS";

// QTRAJ_WORKERS if set to a positive integer, else the hardware thread count.
int worker_count();

// Calls body(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers = worker_count());

struct EnsembleInput {
  Vec psi0;
  SparseOperator h0;
  std::vector<JumpChannel> channels;
  EngineConfig engine;
  JumpMode mode = JumpMode::Stochastic;
};

// Runs trajectories 0..n_traj-1 and records `observables` on the sample grid.
// Output order is by trajectory index regardless of scheduling.
std::vector<RunRecord> run_ensemble(const EnsembleInput& input, const ObservableSet& observables,
                                    std::size_t n_traj, int workers = worker_count());

// Trajectory-averaged density matrix at each sample time, for comparisons
// with the master equation.
std::vector<DenseMatrix> ensemble_density(const EnsembleInput& input, std::size_t n_traj,
                                          int workers = worker_count());

}  // namespace qtraj
