#include "qtraj/trajectory.hpp"

#include <cmath>

#include "qtraj/rng.hpp"

namespace qtraj {

void EngineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(t_final, "t_final");
  positive(sample_interval, "sample_interval");
  positive(dt_max, "dt_max");
  positive(rtol, "rtol");
  positive(atol, "atol");
  positive(jump_tol, "jump_tol");
  if (jump_tol >= 1e-3) throw InvalidArgument("jump_tol must be much smaller than 1");
  if (max_bisections < 1) throw InvalidArgument("max_bisections must be >= 1");
}

std::vector<double> sample_times(double t_final, double interval) {
  std::vector<double> out;
  const double slack = 1e-9 * interval;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (t > t_final + slack) break;
    out.push_back(std::min(t, t_final));
  }
  if (out.back() < t_final - slack) out.push_back(t_final);
  return out;
}

namespace {

DormandPrince<Vec> make_integrator(const SparseOperator& heff, const StepControl& control) {
  const SparseMatrix& h = heff.matrix();
  return DormandPrince<Vec>([&h](const Vec& y, Vec& dy) { dy.noalias() = cplx(0.0, -1.0) * (h * y); }, control);
}

void check_state(const Vec& psi, const SparseOperator& op) {
  if (psi.size() != op.dimension()) {
    throw InvalidArgument("state has dimension " + std::to_string(psi.size()) + ", operator " +
                          std::to_string(op.dimension()));
  }
}

}  // namespace

Vec evolve_nonhermitian(const Vec& psi, const SparseOperator& heff, double dt, const StepControl& control) {
  check_state(psi, heff);
  if (psi.squaredNorm() == 0.0) throw InvalidArgument("cannot evolve the zero vector");
  if (!(dt >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
  auto stepper = make_integrator(heff, control);
  Vec y = psi;
  double t = 0.0;
  while (t < dt) {
    const double remaining = dt - t;
    const double h = stepper.advance(y, remaining);
    t = (h == remaining) ? dt : t + h;
  }
  return y;
}

Vec apply_jump(const SparseOperator& c, const Vec& psi) {
  Vec out = c.apply(psi);
  const double n = out.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("jump operator annihilated the state");
  return out / n;
}

TrajectoryResult run_trajectory(const Vec& psi0, const SparseOperator& h0, std::span<const JumpChannel> channels,
                                const EngineConfig& config, std::uint64_t traj_id, const SampleHook& hook,
                                JumpMode mode) {
  config.validate();
  check_state(psi0, h0);
  if (std::abs(psi0.norm() - 1.0) > 1e-8) throw InvalidArgument("initial state must be normalised");

  const SparseOperator heff = effective_hamiltonian(h0, channels);
  auto stepper = make_integrator(heff, config.step_control());
  PhiloxStream rng(config.seed, traj_id);

  TrajectoryResult result;
  result.traj_id = traj_id;
  Vec psi = psi0;
  const bool jumps_enabled = mode == JumpMode::Stochastic && !channels.empty();
  double r = jumps_enabled ? rng.uniform() : 0.0;

  const auto samples = sample_times(config.t_final, config.sample_interval);
  if (hook) hook(0.0, psi);
  std::size_t next_sample = 1;
  double t = 0.0;
  // Loose guard on the monotone-norm property; RK round-off is far below it.
  const double growth_tol = std::max(1e-9, 100.0 * config.rtol);
  std::vector<double> weights(channels.size());

  while (next_sample < samples.size()) {
    const double target = samples[next_sample];
    const double remaining = target - t;
    const Vec before = psi;
    const double norm_before = before.squaredNorm();
    const double h = stepper.advance(psi, remaining);
    const double norm_after = psi.squaredNorm();
    if (!std::isfinite(norm_after)) throw NumericalFailure("non-finite state at t=" + std::to_string(t));
    if (norm_after > norm_before * (1.0 + growth_tol)) {
      throw NumericalFailure("state norm grew during non-Hermitian evolution at t=" + std::to_string(t));
    }

    if (jumps_enabled && norm_after < r) {
      // Bisect on the step length: f(0) > 0, f(h) < 0.
      double lo = 0.0, hi = h;
      Vec located;
      double residual = 0.0;
      bool converged = false;
      for (int it = 0; it < config.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        located = stepper.trial(before, mid);
        residual = located.squaredNorm() - r;
        if (std::abs(residual) < config.jump_tol) {
          converged = true;
          t += mid;
          break;
        }
        (residual > 0.0 ? lo : hi) = mid;
      }
      if (!converged) {
        throw NumericalFailure("jump time not located to " + std::to_string(config.jump_tol) + " within " +
                               std::to_string(config.max_bisections) + " bisections");
      }

      double total = 0.0;
      for (std::size_t k = 0; k < channels.size(); ++k) {
        weights[k] = channels[k].op.apply(located).squaredNorm();
        total += weights[k];
      }
      if (!(total > 0.0)) throw NumericalFailure("jump with zero total channel weight");
      const double u = rng.uniform() * total;
      std::size_t chosen = 0;
      for (double acc = weights[0]; acc < u && chosen + 1 < channels.size();) acc += weights[++chosen];
      psi = apply_jump(channels[chosen].op, located);
      result.jumps.push_back({t, chosen, residual});
      r = rng.uniform();
      stepper.reset();
      continue;
    }

    t = (h == remaining) ? target : t + h;
    if (mode == JumpMode::NoJump) {
      const double n = psi.norm();
      if (!(n > 0.0)) throw NumericalFailure("zero-photon branch has vanishing norm");
      psi /= n;
      stepper.rescale(1.0 / n);
    }
    if (t == target) {
      if (hook) hook(t, psi / psi.norm());
      ++next_sample;
    }
  }

  result.final_state = psi / psi.norm();
  result.steps = stepper.accepted();
  result.rejected_steps = stepper.rejected();
  return result;
}

}  // namespace qtraj
