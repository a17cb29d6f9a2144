#pragma once

// Closed-form models used as verification oracles for the engine.

#include "qtraj/model.hpp"
#include "qtraj/probe.hpp"

namespace qtraj {

// Two-mode imbalance between jumps:
//   z0(t) = (1/2) e^{-N gamma t / 2} [c0 sin(2Jt) + 2 z00 cos(2Jt)].
double z0_between_jumps(double t, double c0, double z00, int n, double gamma, double J);
// Jump-driven envelope z0 = -1 + (1 + z00) e^{N gamma t}. Unclamped; it is an
// envelope, not a state.
double z0_jump_envelope(double t, double z00, int n, double gamma);
// Rates of the two exponentials above: {damping N gamma / 2, growth N gamma}.
struct EnvelopeRates {
  double damping = 0.0;
  double growth = 0.0;
};
EnvelopeRates envelope_rates(int n, double gamma);

// [1 + J/(U - 4 i gamma) sum_<ij> (b_i^+ b_j + b_j^+ b_i)] |Mott>, normalised.
// The basis must hold an integer filling N = nu L of bosons.
Vec perturbed_mott_state(const BasisPtr& basis, const LatticeSpec& lattice, double gamma);

// sigma^2_DeltaN = 8 J^2 L nu (nu + 1) / (U^2 + 16 gamma^2).
double sigma2_DeltaN(double J, double U, double gamma, int sites, int filling);

// Eigenvector of H_eff (dense) with the largest overlap with `reference`:
// the long-time limit of the zero-photon branch started from it.
struct SteadyState {
  Vec state;
  cplx eigenvalue;
  double overlap = 0.0;  // |<reference|state>|^2
};
SteadyState postselected_steady_state(const SparseOperator& heff, const Vec& reference);

// Second-order Zeno Hamiltonian on the D-eigenspace P0 holding psi0:
//   H_Z = P0 H0 P0 - (i/gamma) sum_{k not in P0} P0 H0 |k><k| H0 P0 / w_k
// Dephasing form: w_k = |d_k - d0|^2, which for two modes equals the
// constant A = (J_phi - J_phi')^2 of the two-hop term.
// NoJump form:    w_k = |d_k|^2 - |d0|^2, from eliminating the intermediate
// states under H_eff alone.
enum class ZenoForm { Dephasing, NoJump };
SparseOperator zeno_hamiltonian(const SparseOperator& h0, const DiagonalProfile& profile, double gamma,
                                const Vec& psi0, ZenoForm form = ZenoForm::Dephasing);
// The D eigenvalue d0 shared by the support of psi0; throws otherwise.
cplx zeno_eigenvalue(const SparseOperator& d, const Vec& psi0, double tol = 1e-12);

// [1 - sech^2(4 J^2 t / gamma)] / 4.
double pair_correlation_law(double t, double J, double gamma);

// Amplitude prefactor 2^m J / (K U) of the particle-hole superposition after
// m jumps, with K sites per mode.
double excitation_prefactor(int jumps, double J, double U, int sites_per_mode);

}  // namespace qtraj
