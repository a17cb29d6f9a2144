#include "qtraj/model.hpp"

#include <algorithm>
#include <cmath>

#include "qtraj/rng.hpp"

namespace qtraj {

void LatticeSpec::validate() const {
  if (sites < 2) throw InvalidArgument("lattice needs L >= 2, got " + std::to_string(sites));
  if (!(J >= 0.0)) throw InvalidArgument("tunneling rate J must be >= 0");
  if (!std::isfinite(U)) throw InvalidArgument("interaction U must be finite");
}

std::vector<std::pair<int, int>> LatticeSpec::bonds() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < sites; ++i) out.emplace_back(i, i + 1);
  if (boundary == Boundary::Periodic && sites > 2) out.emplace_back(sites - 1, 0);
  return out;
}

bool LatticeSpec::neighbors(int i, int j) const {
  if (i == j) return false;
  const int d = std::abs(i - j);
  return d == 1 || (boundary == Boundary::Periodic && sites > 2 && d == sites - 1);
}

namespace {

void check_basis(const BasisPtr& basis, const LatticeSpec& spec, Species expected) {
  spec.validate();
  if (basis->species() != expected) {
    throw InvalidArgument(expected == Species::Boson ? "Bose-Hubbard model needs a bosonic basis"
                                                     : "Fermi-Hubbard model needs a fermionic basis");
  }
  if (basis->sites() != spec.sites) {
    throw InvalidArgument("basis has " + std::to_string(basis->sites()) + " sites but lattice has " +
                          std::to_string(spec.sites));
  }
}

void append_kinetic(const FockBasis& basis, const LatticeSpec& spec, std::vector<Triplet>& t) {
  const bool fermion = basis.species() == Species::FermionSpinHalf;
  for (auto [i, j] : spec.bonds()) {
    if (fermion) {
      for (Spin s : {Spin::Up, Spin::Down}) {
        detail::append_mode_hop(basis, basis.mode(i, s), basis.mode(j, s), -spec.J, t);
        detail::append_mode_hop(basis, basis.mode(j, s), basis.mode(i, s), -spec.J, t);
      }
    } else {
      detail::append_mode_hop(basis, i, j, -spec.J, t);
      detail::append_mode_hop(basis, j, i, -spec.J, t);
    }
  }
}

}  // namespace

SparseOperator kinetic_op(const BasisPtr& basis, const LatticeSpec& spec) {
  spec.validate();
  std::vector<Triplet> t;
  append_kinetic(*basis, spec, t);
  return SparseOperator::from_triplets(basis, t, true);
}

SparseOperator bose_hubbard(const BasisPtr& basis, const LatticeSpec& spec) {
  check_basis(basis, spec, Species::Boson);
  std::vector<Triplet> t;
  append_kinetic(*basis, spec, t);
  if (spec.U != 0.0) {
    for (std::size_t k = 0; k < basis->dimension(); ++k) {
      double e = 0.0;
      for (auto n : basis->state(k)) e += 0.5 * spec.U * n * (n - 1.0);
      if (e != 0.0) t.emplace_back(Eigen::Index(k), Eigen::Index(k), e);
    }
  }
  return SparseOperator::from_triplets(basis, t, true);
}

SparseOperator fermi_hubbard(const BasisPtr& basis, const LatticeSpec& spec) {
  check_basis(basis, spec, Species::FermionSpinHalf);
  std::vector<Triplet> t;
  append_kinetic(*basis, spec, t);
  if (spec.U != 0.0) {
    for (std::size_t k = 0; k < basis->dimension(); ++k) {
      int doublons = 0;
      for (int j = 0; j < spec.sites; ++j) {
        doublons += basis->occupation(k, j, Spin::Up) * basis->occupation(k, j, Spin::Down);
      }
      if (doublons != 0) t.emplace_back(Eigen::Index(k), Eigen::Index(k), -spec.U * doublons);
    }
  }
  return SparseOperator::from_triplets(basis, t, true);
}

SparseOperator hubbard(const BasisPtr& basis, const LatticeSpec& spec) {
  return basis->species() == Species::Boson ? bose_hubbard(basis, spec) : fermi_hubbard(basis, spec);
}

SparseOperator decay_operator(const BasisPtr& basis, std::span<const JumpChannel> channels) {
  auto total = SparseOperator::zero(basis);
  for (const auto& c : channels) {
    if (!c.op.basis().same_sector(*basis)) {
      throw InvalidArgument("jump channel '" + c.label + "' acts on a different basis");
    }
    total += c.op.adjoint() * c.op;
  }
  return total;
}

SparseOperator effective_hamiltonian(const SparseOperator& h0, std::span<const JumpChannel> channels) {
  if (channels.empty()) return h0;
  auto heff = h0 - cplx(0.0, 0.5) * decay_operator(h0.basis_ptr(), channels);
  return SparseOperator(heff.basis_ptr(), heff.matrix(), false);
}

// ---------------------------------------------------------------------------

Eigenpair ground_state(const SparseOperator& h, const LanczosOptions& options) {
  const Eigen::Index n = h.dimension();
  if (n == 0) throw InvalidArgument("empty operator");
  const auto& a = h.matrix();

  Vec v(n);
  {
    PhiloxStream rng(0x5eed'1a2c'705bULL, 0);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
    v.normalize();
  }

  Eigenpair result;
  const Eigen::Index m_max = std::min<Eigen::Index>(n, options.krylov_dim);
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    DenseMatrix q(n, m_max);
    Eigen::VectorXd alpha(m_max);
    Eigen::VectorXd beta(m_max);
    q.col(0) = v;
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < m_max; ++k) {
      Vec w = a * q.col(k);
      alpha[k] = q.col(k).dot(w).real();
      // Full reorthogonalisation (twice is enough).
      for (int pass = 0; pass < 2; ++pass) {
        const Vec overlaps = q.leftCols(k + 1).adjoint() * w;
        w -= q.leftCols(k + 1) * overlaps;
      }
      m = k + 1;
      const double b = w.norm();
      beta[k] = b;
      if (k + 1 == m_max || b < 1e-13) break;
      q.col(k + 1) = w / b;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      t(k, k) = alpha[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
    const Eigen::VectorXd s = tri.eigenvectors().col(0);
    Vec ritz = q.leftCols(m) * s.cast<cplx>();
    ritz.normalize();
    const double theta = tri.eigenvalues()[0];
    const double residual = (a * ritz - theta * ritz).norm();

    result = {theta, ritz, residual, restart};
    if (residual < options.tolerance) return result;
    v = ritz;
  }
  throw NumericalFailure("Lanczos did not converge: residual " + std::to_string(result.residual));
}

}  // namespace qtraj
