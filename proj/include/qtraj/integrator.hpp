#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta for autonomous linear systems
// y' = f(y), where y is a complex Eigen vector or matrix.
//
// Error norm: RMS over components of e_i / sc_i with
//   sc_i = atol * rms(y) + rtol * max(|y_i|, |y_new_i|).
// The atol term is relative to the state's own size, so the controller is
// indifferent to the decaying norm of an unnormalised trajectory.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "qtraj/types.hpp"

namespace qtraj {

struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_max = 0.05;
  int max_rejects = 60;  // consecutive rejections before giving up
};

template <class State>
class DormandPrince {
 public:
  using Rhs = std::function<void(const State& y, State& dydt)>;

  DormandPrince(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), control_(control) {
    if (!(control_.rtol > 0.0) || !(control_.atol > 0.0) || !(control_.dt_max > 0.0)) {
      throw InvalidArgument("integrator tolerances and dt_max must be positive");
    }
  }

  // Forget the cached derivative (call after y is modified outside the
  // integrator, e.g. by a jump). The step-size estimate is kept.
  void reset() { have_k1_ = false; }

  // The caller multiplied y by s; keep the cached derivative consistent
  // (valid because the system is linear).
  void rescale(double s) {
    if (have_k1_) k1_ *= s;
  }

  // One accepted step of size at most h_limit. Updates y in place and
  // returns the step size taken.
  double advance(State& y, double h_limit) {
    if (!have_k1_) {
      k1_.resizeLike(y);
      rhs_(y, k1_);
      have_k1_ = true;
    }
    if (h_ <= 0.0) h_ = initial_step(y);
    int rejects = 0;
    for (;;) {
      const bool limited = h_ >= h_limit;
      const double h = std::min({h_, h_limit, control_.dt_max});
      stage(y, h);
      const double err = error_norm(y, y_new_);
      if (std::isfinite(err) && err <= 1.0) {
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A step clipped by h_limit says nothing about the natural size.
        h_ = limited ? std::max(h_, h * grow) : h * grow;
        h_ = std::min(h_, control_.dt_max);
        y.swap(y_new_);
        k1_.swap(k7_);
        ++accepted_;
        return h;
      }
      ++rejected_;
      h_ = std::isfinite(err) ? h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.2 * h;
      if (++rejects > control_.max_rejects || h_ < 1e-300) {
        throw NumericalFailure("integrator step size underflow after " + std::to_string(rejects) +
                               " rejections (h=" + std::to_string(h) + ")");
      }
    }
  }

  // Single step of exactly h from y with no error control and no effect on
  // the controller state. Used to resolve events inside an accepted step.
  State trial(const State& y, double h) {
    State k1;
    k1.resizeLike(y);
    rhs_(y, k1);
    std::swap(k1, k1_);
    const bool had = have_k1_;
    stage(y, h);
    std::swap(k1, k1_);
    have_k1_ = had;
    return y_new_;
  }

  std::size_t accepted() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }

 private:
  double initial_step(const State& y) const {
    const double fy = k1_.norm();
    const double ny = y.norm();
    double h = (fy > 0.0 && ny > 0.0) ? 0.01 * ny / fy : control_.dt_max;
    return std::min(h, control_.dt_max);
  }

  void stage(const State& y, double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    tmp_ = y + h * (a21 * k1_);
    rhs_(tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs_(tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(tmp_, k6_);
    y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(y_new_, k7_);
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  double error_norm(const State& y, const State& y_new) const {
    const double n = static_cast<double>(y.size());
    const double rms = y.norm() / std::sqrt(n);
    const auto scale =
        (control_.atol * rms + control_.rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).eval();
    return std::sqrt((err_.cwiseAbs().array() / scale).square().sum() / n);
  }

  Rhs rhs_;
  StepControl control_;
  double h_ = 0.0;
  bool have_k1_ = false;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, err_;
};

}  // namespace qtraj
