#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/fock.hpp"

namespace qtraj {

enum class Boundary { Open, Periodic };

// 1D chain. hbar = 1; J and U are rates (1/time).
//
// Sign convention for U follows the Hamiltonians as written:
//   bosons    H = -J sum (b_i^+ b_j + h.c.) + (U/2) sum n_i (n_i - 1)   (U > 0 repulsive)
//   fermions  H = -J sum_s (f_{i,s}^+ f_{j,s} + h.c.) - U sum n_{i,up} n_{i,down}  (U > 0 attractive)
struct LatticeSpec {
  int sites = 2;
  Boundary boundary = Boundary::Open;
  double J = 1.0;
  double U = 0.0;

  void validate() const;
  // Unordered nearest-neighbour pairs (i < j, except the periodic wrap bond
  // which is listed as (L-1, 0)). A periodic chain of two sites has one bond.
  std::vector<std::pair<int, int>> bonds() const;
  bool neighbors(int i, int j) const;
};

// Measurement channel: the jump operator c with all rate factors folded in.
struct JumpChannel {
  std::string label;
  SparseOperator op;
};

SparseOperator bose_hubbard(const BasisPtr& basis, const LatticeSpec& spec);
SparseOperator fermi_hubbard(const BasisPtr& basis, const LatticeSpec& spec);
// Dispatches on the basis species.
SparseOperator hubbard(const BasisPtr& basis, const LatticeSpec& spec);

// -J sum over bonds of (a_i^+ a_j + a_j^+ a_i), summed over spin for fermions.
SparseOperator kinetic_op(const BasisPtr& basis, const LatticeSpec& spec);

// H0 - (i/2) sum_k c_k^+ c_k.
SparseOperator effective_hamiltonian(const SparseOperator& h0, std::span<const JumpChannel> channels);
// sum_k c_k^+ c_k.
SparseOperator decay_operator(const BasisPtr& basis, std::span<const JumpChannel> channels);

struct Eigenpair {
  double value = 0.0;
  Vec vector;
  double residual = 0.0;
  int restarts = 0;
};

struct LanczosOptions {
  double tolerance = 1e-10;  // on ||H v - lambda v||
  int krylov_dim = 40;
  int max_restarts = 500;
};

// Lowest eigenpair of a Hermitian operator by restarted Lanczos with full
// reorthogonalisation. Deterministic (fixed start vector).
Eigenpair ground_state(const SparseOperator& h, const LanczosOptions& options = {});

}  // namespace qtraj
