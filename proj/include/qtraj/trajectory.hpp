#pragma once

// Quantum-jump trajectories.
//
// Between jumps the unnormalised state follows i d/dt psi = H_eff psi, so
// ||psi||^2 decays from 1. A jump fires when ||psi||^2 drops to a uniform
// threshold r; the crossing is located by bisection inside the accepted
// step, channel k is drawn with weight ||c_k psi||^2, and c_k psi is
// renormalised before a fresh r is drawn.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qtraj/integrator.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

struct EngineConfig {
  double t_final = 1.0;
  double sample_interval = 0.1;
  double dt_max = 0.05;
  double rtol = 1e-8;
  double atol = 1e-10;
  double jump_tol = 1e-10;  // on | ||psi||^2 - r | at a located jump
  int max_bisections = 60;
  std::uint64_t seed = 0;

  void validate() const;
  StepControl step_control() const { return {rtol, atol, dt_max}; }
};

enum class JumpMode {
  Stochastic,
  // Zero-photon branch: no jumps are drawn and the state is renormalised
  // after every accepted step.
  NoJump,
};

struct JumpEvent {
  double time = 0.0;
  std::size_t channel = 0;
  double norm_residual = 0.0;  // ||psi||^2 - r at the located time
};

// Called at t = 0 and on every sample time with the normalised state.
using SampleHook = std::function<void(double t, const Vec& psi)>;

struct TrajectoryResult {
  std::uint64_t traj_id = 0;
  std::vector<JumpEvent> jumps;
  Vec final_state;  // normalised
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

// Sample grid 0, dt, 2dt, ... up to t_final, with t_final appended when it
// is not on the grid.
std::vector<double> sample_times(double t_final, double interval);

// exp(-i H_eff dt) psi by adaptive integration, without renormalisation.
Vec evolve_nonhermitian(const Vec& psi, const SparseOperator& heff, double dt, const StepControl& control = {});

// One trajectory. The RNG stream is (config.seed, traj_id).
TrajectoryResult run_trajectory(const Vec& psi0, const SparseOperator& h0, std::span<const JumpChannel> channels,
                                const EngineConfig& config, std::uint64_t traj_id, const SampleHook& hook = {},
                                JumpMode mode = JumpMode::Stochastic);

// Normalised single-jump update c psi / ||c psi||.
Vec apply_jump(const SparseOperator& c, const Vec& psi);

}  // namespace qtraj
