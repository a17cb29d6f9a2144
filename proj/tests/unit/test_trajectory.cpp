#include <doctest.h>

#include "oracles.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/probe.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"

using namespace qtraj;

namespace {

Vec random_state(Eigen::Index d, std::uint64_t seed) {
  PhiloxStream rng(seed, 0);
  Vec v(d);
  for (auto& x : v) x = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return v / v.norm();
}

SparseOperator random_operator(const BasisPtr& b, std::uint64_t seed, double scale) {
  PhiloxStream rng(seed, 1);
  const auto d = Eigen::Index(b->dimension());
  DenseMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = scale * cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return SparseOperator(b, m.sparseView(), false);
}

}  // namespace

TEST_CASE("sample grid") {
  CHECK(sample_times(1.0, 0.25) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(sample_times(1.0, 0.3).back() == 1.0);
  CHECK(sample_times(1.0, 0.3).size() == 5);
  CHECK(sample_times(0.1 * 3, 0.1).size() == 4);
}

TEST_CASE("Hermitian evolution conserves the norm") {
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(3));
  const auto h = bose_hubbard(b, {4, Boundary::Open, 1.0, 2.0});
  const Vec psi = random_state(h.dimension(), 3);
  const Vec out = evolve_nonhermitian(psi, h, 3.7, {1e-11, 1e-13, 0.05});
  CHECK(std::abs(out.norm() - 1.0) < 1e-9);
  const DenseMatrix u = oracle::expm(cplx(0.0, -3.7) * h.dense());
  CHECK((out - u * psi).norm() < 1e-8);
}

TEST_CASE("diagonal decay") {
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  const double kappa = 0.7, gp = 1.3, dt = 0.9;
  std::vector<JumpChannel> ch{{"c", std::sqrt(2.0 * kappa * gp) * number_op(b, 0)}};
  const auto heff = effective_hamiltonian(SparseOperator::zero(b), ch);
  // State 1 is |1,0>, the one the channel sees.
  CHECK(heff.diagonal()[1].imag() == doctest::Approx(-kappa * gp));
  Vec psi(2);
  psi << 0.6, 0.8;
  const Vec out = evolve_nonhermitian(psi, heff, dt);
  CHECK(std::abs(out[0] - 0.6) < 1e-12);
  CHECK(std::abs(out[1] - 0.8 * std::exp(-kappa * gp * dt)) < 1e-10);
}

TEST_CASE("random non-Hermitian generator against the dense exponential") {
  auto b = build_basis(Species::FermionSpinHalf, 5, ParticleContent::fermions(2, 1));
  REQUIRE(b->dimension() == 50);
  const auto a = random_operator(b, 17, 1.0);
  const auto g = random_operator(b, 18, 0.6);
  // Hermitian part plus a negative semidefinite decay -i G^+G / 2.
  const SparseOperator heff(b, (0.5 * (a.matrix() + SparseMatrix(a.matrix().adjoint()))) -
                                   cplx(0.0, 0.5) * SparseMatrix(g.matrix().adjoint() * g.matrix()));
  const Vec psi = random_state(50, 9);
  const double dt = 1.3;
  const Vec out = evolve_nonhermitian(psi, heff, dt, {1e-10, 1e-12, 0.05});
  const Vec ref = oracle::expm(cplx(0.0, -dt) * heff.dense()) * psi;
  CHECK((out - ref).norm() < 1e-8);
  CHECK(out.norm() <= psi.norm());
}

TEST_CASE("no channels: pure Hamiltonian evolution") {
  auto b = build_basis(Species::Boson, 3, ParticleContent::bosons(2));
  const auto h = bose_hubbard(b, {3, Boundary::Open, 1.0, 0.5});
  const Vec psi0 = random_state(h.dimension(), 4);
  EngineConfig cfg;
  cfg.t_final = 2.0;
  cfg.sample_interval = 0.5;
  std::vector<double> times;
  const auto res = run_trajectory(psi0, h, {}, cfg, 0, [&](double t, const Vec&) { times.push_back(t); });
  CHECK(res.jumps.empty());
  CHECK(times == sample_times(2.0, 0.5));
  CHECK((res.final_state - oracle::expm(cplx(0.0, -2.0) * h.dense()) * psi0).norm() < 1e-7);
}

TEST_CASE("dark state never jumps and stays put") {
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  const LatticeSpec two{2, Boundary::Open, 1.0, 0.0};
  const auto B = build_B(b, InterSiteProfile::uniform(two), two);
  const auto h0 = -1.0 * B;
  Vec psi0(2);
  psi0 << 1.0, 1.0;
  psi0 /= std::sqrt(2.0);
  std::vector<JumpChannel> ch{{"dark", 2.0 * (B - SparseOperator::identity(b))}};
  EngineConfig cfg;
  cfg.t_final = 50.0;
  cfg.sample_interval = 5.0;
  for (std::uint64_t id = 0; id < 5; ++id) {
    const auto res = run_trajectory(psi0, h0, ch, cfg, id, [&](double, const Vec& psi) {
      CHECK(std::abs(std::abs(psi.dot(psi0)) - 1.0) < 1e-9);
    });
    CHECK(res.jumps.empty());
  }
}

TEST_CASE("jump log contract: ordering, threshold consistency, determinism") {
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(2));
  const auto h0 = bose_hubbard(b, {4, Boundary::Open, 1.0, 1.0});
  std::vector<JumpChannel> ch{make_channel("D", build_D(b, odd_sites_profile(4)), DirectGamma{1.0}),
                              make_channel("B", build_D(b, alternating_profile(4)), DirectGamma{0.5})};
  const Vec psi0 = ground_state(h0).vector;
  EngineConfig cfg;
  cfg.t_final = 10.0;
  cfg.seed = 2024;
  const auto a = run_trajectory(psi0, h0, ch, cfg, 7);
  const auto c = run_trajectory(psi0, h0, ch, cfg, 7);
  REQUIRE(a.jumps.size() > 3);
  REQUIRE(a.jumps.size() == c.jumps.size());
  for (std::size_t i = 0; i < a.jumps.size(); ++i) {
    CHECK(a.jumps[i].time == c.jumps[i].time);
    CHECK(a.jumps[i].channel == c.jumps[i].channel);
    CHECK(std::abs(a.jumps[i].norm_residual) < cfg.jump_tol);
    if (i > 0) CHECK(a.jumps[i].time > a.jumps[i - 1].time);
  }
  const auto other = run_trajectory(psi0, h0, ch, cfg, 8);
  CHECK((other.jumps.empty() || other.jumps.front().time != a.jumps.front().time));
}

TEST_CASE("zero-photon branch stays normalised and never jumps") {
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(2));
  const auto h0 = bose_hubbard(b, {4, Boundary::Open, 1.0, 1.0});
  std::vector<JumpChannel> ch{make_channel("D", build_D(b, odd_sites_profile(4)), DirectGamma{5.0})};
  EngineConfig cfg;
  cfg.t_final = 5.0;
  const Vec psi0 = ground_state(h0).vector;
  const auto res = run_trajectory(psi0, h0, ch, cfg, 0, {}, JumpMode::NoJump);
  CHECK(res.jumps.empty());
  // Oracle: normalised exp(-i H_eff t) psi0.
  const auto heff = effective_hamiltonian(h0, ch);
  Vec ref = oracle::expm(cplx(0.0, -5.0) * heff.dense()) * psi0;
  ref /= ref.norm();
  CHECK(std::abs(std::abs(ref.dot(res.final_state)) - 1.0) < 1e-8);
}

TEST_CASE("empirical jump rate of a driven two-level system") {
  // One particle on two sites: a two-level system driven by tunnelling,
  // monitored through c = sqrt(2 g0) n_0.
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  const LatticeSpec two{2, Boundary::Open, 1.0, 0.0};
  const auto h0 = bose_hubbard(b, two);
  const double g0 = 0.5, T = 5.0;
  std::vector<JumpChannel> ch{{"n0", std::sqrt(2.0 * g0) * number_op(b, 0)}};
  Vec psi0 = Vec::Zero(2);
  psi0[1] = 1.0;  // |1,0>

  EngineConfig cfg;
  cfg.t_final = T;
  cfg.sample_interval = T;
  cfg.seed = 99;
  const std::size_t M = 2000;
  std::vector<std::size_t> counts(M);
  parallel_for(M, [&](std::size_t i) { counts[i] = run_trajectory(psi0, h0, ch, cfg, i).jumps.size(); });
  double empirical = 0.0;
  for (auto n : counts) empirical += double(n);
  empirical /= double(M);

  // Expected count: integral of 2 g0 <n_0> under the master equation.
  std::vector<double> grid;
  const int steps = 1000;
  for (int k = 1; k <= steps; ++k) grid.push_back(T * k / steps);
  const auto rho = lindblad_evolve(pure_density(psi0), h0, ch, grid);
  const auto n0 = number_op(b, 0);
  double integral = 0.5 * (pure_density(psi0)(1, 1).real());
  for (int k = 0; k < steps; ++k) integral += (k + 1 == steps ? 0.5 : 1.0) * rho[std::size_t(k)](1, 1).real();
  integral *= T / steps;
  const double expected = 2.0 * g0 * integral;
  CHECK(empirical == doctest::Approx(expected).epsilon(0.05));
}
