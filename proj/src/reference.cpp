#include "qtraj/reference.hpp"

#include <cmath>

namespace qtraj {

double z0_between_jumps(double t, double c0, double z00, int n, double gamma, double J) {
  return 0.5 * std::exp(-0.5 * n * gamma * t) * (c0 * std::sin(2.0 * J * t) + 2.0 * z00 * std::cos(2.0 * J * t));
}

double z0_jump_envelope(double t, double z00, int n, double gamma) {
  return -1.0 + (1.0 + z00) * std::exp(n * gamma * t);
}

EnvelopeRates envelope_rates(int n, double gamma) { return {0.5 * n * gamma, n * gamma}; }

Vec perturbed_mott_state(const BasisPtr& basis, const LatticeSpec& lattice, double gamma) {
  if (basis->species() != Species::Boson) throw InvalidArgument("perturbed Mott state needs bosons");
  if (basis->sites() != lattice.sites) throw InvalidArgument("basis and lattice disagree on L");
  const int L = basis->sites();
  const int N = basis->particles();
  if (N == 0 || N % L != 0) throw InvalidArgument("perturbed Mott state needs integer filling N = nu L");
  if (lattice.U == 0.0 && gamma == 0.0) throw InvalidArgument("perturbed Mott state undefined for U = gamma = 0");

  std::vector<std::uint8_t> mott(static_cast<std::size_t>(L), static_cast<std::uint8_t>(N / L));
  const auto k = basis->index(mott);
  Vec psi = Vec::Zero(Eigen::Index(basis->dimension()));
  psi[Eigen::Index(*k)] = 1.0;

  LatticeSpec unit = lattice;
  unit.J = 1.0;
  // kinetic_op carries -J; flip to get the bare sum of hops.
  const SparseOperator hops = -1.0 * kinetic_op(basis, unit);
  const cplx coeff = lattice.J / cplx(lattice.U, -4.0 * gamma);
  psi += coeff * hops.apply(psi);
  return psi / psi.norm();
}

double sigma2_DeltaN(double J, double U, double gamma, int sites, int filling) {
  if (sites < 2) throw InvalidArgument("sigma2_DeltaN needs L >= 2");
  if (filling < 1) throw InvalidArgument("sigma2_DeltaN needs filling >= 1");
  const double denom = U * U + 16.0 * gamma * gamma;
  if (denom == 0.0) throw InvalidArgument("sigma2_DeltaN undefined for U = gamma = 0");
  return 8.0 * J * J * sites * filling * (filling + 1.0) / denom;
}

SteadyState postselected_steady_state(const SparseOperator& heff, const Vec& reference) {
  if (reference.size() != heff.dimension()) throw InvalidArgument("reference state dimension mismatch");
  Eigen::ComplexEigenSolver<DenseMatrix> es(heff.dense());
  if (es.info() != Eigen::Success) throw NumericalFailure("eigen decomposition of H_eff failed");
  const Vec ref = reference / reference.norm();
  SteadyState best;
  best.overlap = -1.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    Vec v = es.eigenvectors().col(i);
    v /= v.norm();
    const double ov = std::norm(ref.dot(v));
    if (ov > best.overlap) best = {v, es.eigenvalues()[i], ov};
  }
  // Fix the global phase so the overlap with the reference is real positive.
  const cplx phase = ref.dot(best.state);
  if (std::abs(phase) > 0.0) best.state *= std::conj(phase) / std::abs(phase);
  return best;
}

cplx zeno_eigenvalue(const SparseOperator& d, const Vec& psi0, double tol) {
  if (!d.is_diagonal()) throw InvalidArgument("Zeno projection needs a diagonal measurement operator");
  if (psi0.size() != d.dimension()) throw InvalidArgument("initial state dimension mismatch");
  const Vec diag = d.diagonal();
  const double scale = psi0.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw InvalidArgument("initial state is zero");
  bool found = false;
  cplx d0 = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    if (std::abs(psi0[k]) <= tol * scale) continue;
    if (!found) {
      d0 = diag[k];
      found = true;
    } else if (std::abs(diag[k] - d0) > 1e-9) {
      throw InvalidArgument("initial state is not inside a single D eigenspace");
    }
  }
  return d0;
}

SparseOperator zeno_hamiltonian(const SparseOperator& h0, const DiagonalProfile& profile, double gamma,
                                const Vec& psi0, ZenoForm form) {
  if (!(gamma > 0.0)) throw InvalidArgument("Zeno Hamiltonian needs gamma > 0");
  std::vector<cplx> distinct;
  for (const auto& c : profile) {
    bool seen = false;
    for (const auto& v : distinct) seen = seen || std::abs(v - c) <= 1e-12;
    if (!seen) distinct.push_back(c);
  }
  if (distinct.size() > 2) throw InvalidArgument("Zeno Hamiltonian is defined for two-mode geometries only");

  const auto& basis = h0.basis_ptr();
  const SparseOperator d = build_D(basis, profile);
  const cplx d0 = zeno_eigenvalue(d, psi0);
  const Vec diag = d.diagonal();

  std::vector<Triplet> p0, q_over_w;
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    if (std::abs(diag[k] - d0) <= 1e-9) {
      p0.emplace_back(k, k, 1.0);
      continue;
    }
    const double w = form == ZenoForm::Dephasing ? std::norm(diag[k] - d0) : std::norm(diag[k]) - std::norm(d0);
    if (std::abs(w) < 1e-12) {
      throw InvalidArgument("intermediate state degenerate in |D|^2 with the Zeno subspace");
    }
    q_over_w.emplace_back(k, k, 1.0 / w);
  }
  const auto P0 = SparseOperator::from_triplets(basis, p0, true);
  const auto QW = SparseOperator::from_triplets(basis, q_over_w, true);
  const SparseOperator first = P0 * h0 * P0;
  const SparseOperator second = P0 * h0 * QW * h0 * P0;
  auto hz = first - cplx(0.0, 1.0 / gamma) * second;
  return SparseOperator(hz.basis_ptr(), hz.matrix(), false);
}

double pair_correlation_law(double t, double J, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("pair correlation law needs gamma > 0");
  const double th = std::tanh(4.0 * J * J * t / gamma);
  return 0.25 * th * th;
}

double excitation_prefactor(int jumps, double J, double U, int sites_per_mode) {
  if (jumps < 0) throw InvalidArgument("jump count must be >= 0");
  if (sites_per_mode < 1 || U == 0.0) throw InvalidArgument("excitation prefactor needs K >= 1 and U != 0");
  return std::ldexp(1.0, jumps) * J / (sites_per_mode * U);
}

}  // namespace qtraj
