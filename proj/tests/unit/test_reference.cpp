#include <doctest.h>

#include <cmath>

#include "qtraj/observables.hpp"
#include "qtraj/reference.hpp"

using namespace qtraj;

namespace {

Vec basis_state(const FockBasis& b, std::vector<std::uint8_t> occ) {
  Vec v = Vec::Zero(Eigen::Index(b.dimension()));
  v[Eigen::Index(*b.index(occ))] = 1.0;
  return v;
}

// Atomic coherent state (sqrt(p) b1+ + sqrt(1-p) b2+)^N |0> on two sites.
Vec two_site_coherent(const FockBasis& b, double z) {
  const int n = b.particles();
  const double p = 0.5 * (1.0 + z);
  Vec v = Vec::Zero(Eigen::Index(b.dimension()));
  for (int k = 0; k <= n; ++k) {
    const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    const double amp = std::exp(0.5 * (logc + k * std::log(p) + (n - k) * std::log(1.0 - p)));
    v[Eigen::Index(*b.index(std::vector<std::uint8_t>{std::uint8_t(k), std::uint8_t(n - k)}))] = amp;
  }
  return v / v.norm();
}

}  // namespace

TEST_CASE("two-mode imbalance formulas") {
  CHECK(z0_between_jumps(0.0, 0.3, 0.4, 10, 0.1, 1.0) == doctest::Approx(0.4));
  for (double t : {0.3, 1.7, 4.0}) {
    CHECK(z0_between_jumps(t, 0.0, 0.4, 10, 0.0, 1.0) == doctest::Approx(0.4 * std::cos(2.0 * t)));
    CHECK(z0_jump_envelope(t, -1.0, 10, 0.2) == -1.0);
  }
  CHECK(z0_jump_envelope(0.0, 0.25, 10, 0.2) == doctest::Approx(0.25));
  for (int n : {1, 2, 20, 200})
    for (double g : {1e-4, 0.1, 3.0}) {
      const auto r = envelope_rates(n, g);
      CHECK(r.growth > r.damping);
      CHECK(r.damping == doctest::Approx(0.5 * n * g));
    }
}

TEST_CASE("two-site no-jump oscillation follows the damped cosine") {
  const int n = 20;
  const double J = 1.0, gamma = 0.001, z00 = 0.5;
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(n));
  const auto h0 = bose_hubbard(b, {2, Boundary::Open, J, 0.0});
  const JumpChannel ch = make_channel("D", build_D(b, odd_sites_profile(2)), DirectGamma{gamma});
  const auto part = ModePartition::odd_even(2);
  EngineConfig cfg;
  cfg.t_final = M_PI / J;
  cfg.sample_interval = 0.05;
  double worst = 0.0;
  run_trajectory(two_site_coherent(*b, z00), h0, std::span(&ch, 1), cfg, 0,
                 [&](double t, const Vec& psi) {
                   const double z = imbalance(psi, *b, part);
                   worst = std::max(worst, std::abs(z - z0_between_jumps(t, 0.0, z00, n, gamma, J)));
                 },
                 JumpMode::NoJump);
  CHECK(worst / z00 < 0.1);
}

TEST_CASE("perturbed Mott state") {
  const int L = 4;
  auto b = build_basis(Species::Boson, L, ParticleContent::bosons(L));
  const Vec mott = basis_state(*b, {1, 1, 1, 1});
  LatticeSpec lat{L, Boundary::Periodic, 0.0, 10.0};
  CHECK((perturbed_mott_state(b, lat, 3.0) - mott).norm() < 1e-15);

  // gamma = 0: first-order Rayleigh-Schroedinger state from a dense oracle.
  lat.J = 0.1;
  const DenseMatrix h = bose_hubbard(b, lat).dense();
  const DenseMatrix hu = bose_hubbard(b, {L, Boundary::Periodic, 0.0, 10.0}).dense();
  const DenseMatrix v = h - hu;
  const Eigen::Index m = *b->index(std::vector<std::uint8_t>{1, 1, 1, 1});
  Vec first = mott;
  for (Eigen::Index k = 0; k < v.rows(); ++k) {
    if (k == m || v(k, m) == 0.0) continue;
    first[k] = -v(k, m) / (hu(k, k) - hu(m, m));
  }
  first /= first.norm();
  const Vec pert = perturbed_mott_state(b, lat, 0.0);
  CHECK(std::norm(first.dot(pert)) == doctest::Approx(1.0).epsilon(1e-14));
  const auto gs = ground_state(bose_hubbard(b, lat));
  CHECK(std::norm(gs.vector.dot(pert)) > 0.999);

  lat.U = 0.0;
  CHECK_THROWS_AS(perturbed_mott_state(b, lat, 0.0), InvalidArgument);
  auto b3 = build_basis(Species::Boson, L, ParticleContent::bosons(3));
  CHECK_THROWS_AS(perturbed_mott_state(b3, {L, Boundary::Periodic, 1.0, 10.0}, 0.0), InvalidArgument);
}

TEST_CASE("perturbed Mott state matches the postselected steady state") {
  const int L = 4;
  auto b = build_basis(Species::Boson, L, ParticleContent::bosons(L));
  const LatticeSpec lat{L, Boundary::Periodic, 1.0, 10.0};
  const double gamma = 10.0;
  const auto h0 = bose_hubbard(b, lat);
  const auto D = build_D(b, alternating_profile(L));
  const JumpChannel ch = make_channel("D", D, DirectGamma{gamma});
  const Vec pert = perturbed_mott_state(b, lat, gamma);

  const auto ss = postselected_steady_state(effective_hamiltonian(h0, std::span(&ch, 1)), pert);
  CHECK(ss.overlap > 0.95);

  // A far-excited eigenvector decays slightly slower than the dressed Mott
  // branch (Im lambda -0.379 vs -0.387), so compare on the plateau t << 120.
  EngineConfig cfg;
  cfg.t_final = 20.0;
  cfg.sample_interval = 20.0;
  const auto res = run_trajectory(basis_state(*b, {1, 1, 1, 1}), h0, std::span(&ch, 1), cfg, 0, {}, JumpMode::NoJump);
  CHECK(std::norm(pert.dot(res.final_state)) > 0.95);
  CHECK(std::norm(ss.state.dot(res.final_state)) == doctest::Approx(1.0).epsilon(1e-3));

  const double exact = variance(D, ss.state);
  CHECK(std::abs(exact - sigma2_DeltaN(1.0, 10.0, gamma, L, 1)) / exact < 0.25);
}

TEST_CASE("sigma2_DeltaN limits and monotonicity") {
  CHECK(sigma2_DeltaN(1.0, 10.0, 0.0, 4, 1) == doctest::Approx(8.0 * 4 * 2 / 100.0));
  CHECK(sigma2_DeltaN(1.0, 10.0, 1e8, 4, 1) < 1e-12);
  for (double U : {0.0, 1.0, 5.0, 20.0})
    for (double g : {0.5, 2.0, 10.0}) {
      CHECK(sigma2_DeltaN(1.0, U + 1.0, g, 6, 2) < sigma2_DeltaN(1.0, U, g, 6, 2));
      CHECK(sigma2_DeltaN(1.0, U, g * 1.5, 6, 2) < sigma2_DeltaN(1.0, U, g, 6, 2));
    }
  CHECK_THROWS_AS(sigma2_DeltaN(1.0, 0.0, 0.0, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(sigma2_DeltaN(1.0, 1.0, 0.0, 1, 1), InvalidArgument);
}

TEST_CASE("Zeno Hamiltonian structure") {
  const int L = 4;
  auto b = build_basis(Species::Boson, L, ParticleContent::bosons(2));
  const auto h0 = bose_hubbard(b, {L, Boundary::Open, 1.0, 0.0});
  const DiagonalProfile prof{1.0, 1.0, 0.0, 0.0};
  const double gamma = 50.0;
  const Vec psi0 = basis_state(*b, {1, 1, 0, 0});
  const auto hz = zeno_hamiltonian(h0, prof, gamma, psi0);
  const DenseMatrix z = hz.dense();

  // Within-mode hop: only the first-order term connects these states.
  const auto i20 = *b->index(std::vector<std::uint8_t>{2, 0, 0, 0});
  const auto i11 = *b->index(std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(z(Eigen::Index(i20), Eigen::Index(i11)).real() == doctest::Approx(-std::sqrt(2.0)));
  CHECK(z(Eigen::Index(i20), Eigen::Index(i11)).imag() == doctest::Approx(0.0));

  // Oracle: two modes make every one-hop intermediate cost A = 1.
  const Vec d = build_D(b, prof).diagonal();
  DenseMatrix p0 = DenseMatrix::Zero(z.rows(), z.cols());
  for (Eigen::Index k = 0; k < d.size(); ++k) p0(k, k) = std::abs(d[k] - 2.0) < 1e-12 ? 1.0 : 0.0;
  const DenseMatrix q = DenseMatrix::Identity(z.rows(), z.cols()) - p0;
  const DenseMatrix h = h0.dense();
  const DenseMatrix expect = p0 * h * p0 - cplx(0.0, 1.0 / gamma) * (p0 * h * q * h * p0);
  CHECK((z - expect).cwiseAbs().maxCoeff() < 1e-12);

  // No element leaves the Zeno subspace.
  CHECK((q * z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((z * q).cwiseAbs().maxCoeff() == 0.0);

  const DenseMatrix anti = (z - z.adjoint()) / cplx(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(anti);
  CHECK(es.eigenvalues().maxCoeff() < 1e-12);
  CHECK(es.eigenvalues().minCoeff() < -1e-3);

  const Vec mixed = (psi0 + basis_state(*b, {0, 0, 1, 1})) / std::sqrt(2.0);
  CHECK_THROWS_AS(zeno_hamiltonian(h0, prof, gamma, mixed), InvalidArgument);
  CHECK_THROWS_AS(zeno_hamiltonian(h0, {0.0, 1.0, 2.0, 0.0}, gamma, psi0), InvalidArgument);
  CHECK_THROWS_AS(zeno_hamiltonian(h0, prof, 0.0, psi0), InvalidArgument);
}

TEST_CASE("pair correlation law") {
  CHECK(pair_correlation_law(0.0, 1.0, 100.0) == 0.0);
  CHECK(pair_correlation_law(1e4, 1.0, 100.0) == doctest::Approx(0.25));
  double prev = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double v = pair_correlation_law(0.5 * k, 1.0, 100.0);
    CHECK(v >= prev);
    CHECK(v <= 0.25);
    prev = v;
  }
  // [1 - sech^2(x)]/4 written out.
  const double x = 4.0 * 0.7 / 100.0 * 30.0;
  CHECK(pair_correlation_law(30.0, std::sqrt(0.7), 100.0) ==
        doctest::Approx((1.0 - 1.0 / (std::cosh(x) * std::cosh(x))) / 4.0));
}

TEST_CASE("excitation amplification") {
  CHECK(excitation_prefactor(0, 1.0, 10.0, 3) == doctest::Approx(1.0 / 30.0));
  CHECK(excitation_prefactor(3, 1.0, 10.0, 3) == doctest::Approx(8.0 * excitation_prefactor(0, 1.0, 10.0, 3)));
  CHECK_THROWS_AS(excitation_prefactor(-1, 1.0, 10.0, 3), InvalidArgument);

  // Two jumps of the alternating-sign operator applied to the perturbative
  // state: the particle-hole component grows by 4 relative to before.
  const int L = 6;
  auto b = build_basis(Species::Boson, L, ParticleContent::bosons(L));
  const LatticeSpec lat{L, Boundary::Periodic, 1.0, 10.0};
  const Vec psi = perturbed_mott_state(b, lat, 0.1);
  const auto c = make_channel("D", build_D(b, alternating_profile(L)), DirectGamma{0.1}).op;
  const Eigen::Index m = *b->index(std::vector<std::uint8_t>(L, 1));
  auto excitation = [&](Vec v) {
    v[m] = 0.0;
    return v.norm();
  };
  // c = sqrt(2 gamma) D, so c^2 = 2 gamma D^2.
  const Vec d2 = c.apply(c.apply(psi));
  const double ratio = excitation(d2) / excitation(psi) / (2.0 * 0.1);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.5));
}
