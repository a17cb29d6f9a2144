#include "qtraj/lindblad.hpp"

#include <cmath>

namespace qtraj {

DenseMatrix pure_density(const Vec& psi) {
  const Vec v = psi / psi.norm();
  return v * v.adjoint();
}

double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("trace distance of mismatched matrices");
  const DenseMatrix diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double min_eigenvalue(const DenseMatrix& rho) {
  const DenseMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

std::vector<DenseMatrix> lindblad_evolve(const DenseMatrix& rho0, const SparseOperator& h0,
                                         std::span<const JumpChannel> channels, const std::vector<double>& t_grid,
                                         const LindbladOptions& options, const DensityHook& hook) {
  const auto d = static_cast<std::size_t>(h0.dimension());
  if (d > options.dimension_cap) throw DimensionCapExceeded(d, options.dimension_cap);
  if (rho0.rows() != h0.dimension() || rho0.cols() != h0.dimension()) {
    throw InvalidArgument("density matrix does not match the operator dimension");
  }
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw InvalidArgument("rho0 is not Hermitian");
  if (std::abs(rho0.trace() - 1.0) > options.trace_tol) throw InvalidArgument("rho0 does not have unit trace");
  if (d <= options.positivity_check_max_dim && min_eigenvalue(rho0) < -options.positivity_tol) {
    throw InvalidArgument("rho0 is not positive semidefinite");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("time grid must be strictly ascending");
  }
  if (!t_grid.empty() && t_grid.front() < 0.0) throw InvalidArgument("time grid must start at t >= 0");

  const SparseOperator heff = effective_hamiltonian(h0, channels);
  const SparseMatrix& h = heff.matrix();
  const SparseMatrix h_adj = h.adjoint();
  std::vector<SparseMatrix> c, c_adj;
  for (const auto& ch : channels) {
    c.push_back(ch.op.matrix());
    c_adj.push_back(ch.op.matrix().adjoint());
  }

  DormandPrince<DenseMatrix> stepper(
      [&](const DenseMatrix& rho, DenseMatrix& drho) {
        drho = cplx(0.0, -1.0) * (h * rho);
        drho.noalias() += cplx(0.0, 1.0) * (rho * h_adj);
        for (std::size_t k = 0; k < c.size(); ++k) {
          DenseMatrix cr = c[k] * rho;
          drho.noalias() += cr * c_adj[k];
        }
      },
      options.control);

  std::vector<DenseMatrix> out;
  out.reserve(t_grid.size());
  DenseMatrix rho = rho0;
  double t = 0.0;
  for (double target : t_grid) {
    while (t < target) {
      const double remaining = target - t;
      const double step = stepper.advance(rho, remaining);
      t = (step == remaining) ? target : t + step;
    }
    // Remove anti-Hermitian round-off drift; rho is Hermitian exactly.
    rho = (0.5 * (rho + rho.adjoint())).eval();
    stepper.reset();
    const double trace_err = std::abs(rho.trace() - 1.0);
    if (trace_err > options.trace_tol) {
      throw NumericalFailure("master equation trace drifted by " + std::to_string(trace_err) +
                             " at t=" + std::to_string(t));
    }
    if (d <= options.positivity_check_max_dim) {
      const double lam = min_eigenvalue(rho);
      if (lam < -options.positivity_tol) {
        throw NumericalFailure("master equation lost positivity (min eigenvalue " + std::to_string(lam) +
                               ") at t=" + std::to_string(t));
      }
    }
    if (hook) hook(t, rho);
    out.push_back(rho);
  }
  return out;
}

}  // namespace qtraj
