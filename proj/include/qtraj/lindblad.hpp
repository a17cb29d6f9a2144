#pragma once

// Master-equation oracle:
//   d rho/dt = -i (H_eff rho - rho H_eff^+) + sum_k c_k rho c_k^+
// which equals -i[H0, rho] + sum_k (c_k rho c_k^+ - {c_k^+ c_k, rho}/2).

#include <functional>
#include <span>
#include <vector>

#include "qtraj/integrator.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

struct LindbladOptions {
  StepControl control{1e-9, 1e-11, 0.05};
  std::size_t dimension_cap = kMasterDimensionCap;
  double trace_tol = 1e-8;
  double positivity_tol = 1e-8;
  // Full eigenvalue checks are O(d^3) per output time; skipped above this.
  std::size_t positivity_check_max_dim = 400;
};

using DensityHook = std::function<void(double t, const DenseMatrix& rho)>;

// Integrates rho0 through every time in t_grid (ascending, starting at or
// after 0) and returns rho at each of them. The hook, if given, sees the
// same snapshots as they are produced.
std::vector<DenseMatrix> lindblad_evolve(const DenseMatrix& rho0, const SparseOperator& h0,
                                         std::span<const JumpChannel> channels, const std::vector<double>& t_grid,
                                         const LindbladOptions& options = {}, const DensityHook& hook = {});

DenseMatrix pure_density(const Vec& psi);
// (1/2) sum |eig(a - b)| for Hermitian a, b.
double trace_distance(const DenseMatrix& a, const DenseMatrix& b);
double min_eigenvalue(const DenseMatrix& rho);

}  // namespace qtraj
