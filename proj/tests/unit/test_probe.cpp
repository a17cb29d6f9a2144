#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "qtraj/model.hpp"
#include "qtraj/probe.hpp"
#include "qtraj/rng.hpp"

using namespace qtraj;

namespace {

Vec state_of(const FockBasis& b, std::vector<std::uint8_t> occ) {
  Vec v = Vec::Zero(Eigen::Index(b.dimension()));
  v[Eigen::Index(*b.index(occ))] = 1.0;
  return v;
}

cplx eigenvalue_on(const SparseOperator& d, const FockBasis& b, std::vector<std::uint8_t> occ) {
  return d.diagonal()[Eigen::Index(*b.index(occ))];
}

}  // namespace

TEST_CASE("Rayleigh coefficient") {
  const cplx c0 = rayleigh_coefficient(2.0, 1.5, 0.0, 0.5);
  CHECK(std::abs(c0 - cplx(0.0, -2.0 * 1.5 / 0.5)) < 1e-14);
  const double omega = 1.3, dp = 0.7, kappa = 0.4;
  const cplx a0(0.2, -0.9);
  CHECK(std::norm(rayleigh_coefficient(omega, a0, dp, kappa)) ==
        doctest::Approx(omega * omega * std::norm(a0) / (dp * dp + kappa * kappa)));
  // i / (i - 1) = (1 - i) / 2.
  CHECK(std::abs(rayleigh_coefficient(1.0, 1.0, 1.0, 1.0) - cplx(0.5, -0.5)) < 1e-15);
  CHECK_THROWS_AS(rayleigh_coefficient(1.0, 1.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(rayleigh_coefficient(1.0, 1.0, 1.0, -2.0), InvalidArgument);
}

TEST_CASE("measurement strength") {
  MeasurementStrength direct(DirectGamma{0.25});
  CHECK(direct.gamma() == 0.25);
  CHECK(std::norm(direct.jump_prefactor()) == doctest::Approx(0.5));
  CavityParameters p{1.3, cplx(0.2, -0.9), 0.7, 0.4};
  MeasurementStrength cavity(p);
  CHECK(cavity.gamma() == doctest::Approx(std::norm(rayleigh_coefficient(1.3, p.a0, 0.7, 0.4)) * 0.4));
  CHECK(std::norm(cavity.jump_prefactor()) == doctest::Approx(2.0 * cavity.gamma()));
  CHECK_THROWS_AS(MeasurementStrength(DirectGamma{-1.0}), InvalidArgument);
}

TEST_CASE("profiles") {
  const auto odd = odd_sites_profile(5);
  CHECK(odd == DiagonalProfile{1.0, 0.0, 1.0, 0.0, 1.0});
  const auto alt = alternating_profile(4);
  CHECK(alt == DiagonalProfile{1.0, -1.0, 1.0, -1.0});
  const auto r3 = r_mode_profile(3, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(r3[std::size_t(i)] - std::polar(1.0, 2.0 * std::numbers::pi * (i + 1) / 3)) < 1e-15);
  }
}

TEST_CASE("build_D examples") {
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(4));
  CHECK(eigenvalue_on(build_D(b, odd_sites_profile(4)), *b, {1, 1, 1, 1}) == cplx(2.0));
  CHECK(eigenvalue_on(build_D(b, alternating_profile(4)), *b, {1, 1, 1, 1}) == cplx(0.0));
  CHECK(eigenvalue_on(build_D(b, alternating_profile(4)), *b, {2, 0, 1, 1}) == cplx(2.0));
  auto b3 = build_basis(Species::Boson, 3, ParticleContent::bosons(3));
  CHECK(std::abs(eigenvalue_on(build_D(b3, r_mode_profile(3, 3)), *b3, {1, 1, 1})) < 1e-15);
  CHECK_THROWS_AS(build_D(b, odd_sites_profile(5)), InvalidArgument);
  // Commutes with all number operators.
  const auto d = build_D(b, r_mode_profile(4, 3));
  CHECK(d.is_diagonal());
  for (int j = 0; j < 4; ++j) CHECK(max_abs(commutator(d, number_op(b, j))) == 0.0);
}

TEST_CASE("build_B") {
  auto b1 = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  const LatticeSpec two{2, Boundary::Open, 1.0, 0.0};
  const auto B = build_B(b1, InterSiteProfile::uniform(two), two);
  CHECK(B.hermitian_flag());
  CHECK(B.apply(state_of(*b1, {1, 0})).isApprox(state_of(*b1, {0, 1})));
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(B.dense());
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.0));

  for (int L : {3, 4, 5, 6}) {
    const LatticeSpec ring{L, Boundary::Periodic, 1.0, 0.0};
    auto b = build_basis(Species::Boson, L, ParticleContent::bosons(1));
    const auto Bp = build_B(b, InterSiteProfile::uniform(ring), ring);
    CHECK(max_abs(commutator(Bp, bose_hubbard(b, ring))) < 1e-12);
    // Single-particle spectrum 2 cos(2 pi m / L).
    Eigen::SelfAdjointEigenSolver<DenseMatrix> ev(Bp.dense());
    std::vector<double> expected;
    for (int m = 0; m < L; ++m) expected.push_back(2.0 * std::cos(2.0 * std::numbers::pi * m / L));
    std::sort(expected.begin(), expected.end());
    for (int m = 0; m < L; ++m) CHECK(ev.eigenvalues()[m] == doctest::Approx(expected[std::size_t(m)]));
  }
  {
    const LatticeSpec ring{4, Boundary::Periodic, 1.0, 0.0};
    auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(2));
    CHECK(max_abs(commutator(build_B(b, InterSiteProfile::uniform(ring), ring), bose_hubbard(b, ring))) < 1e-12);
  }

  const LatticeSpec chain{4, Boundary::Open, 1.0, 0.0};
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(2));
  InterSiteProfile far{DenseMatrix::Zero(4, 4)};
  far.coefficients(0, 2) = 1.0;
  CHECK_THROWS_AS(build_B(b, far, chain), InvalidArgument);
  InterSiteProfile oneway{DenseMatrix::Zero(4, 4)};
  oneway.coefficients(0, 1) = 1.0;
  const auto nh = build_B(b, oneway, chain);
  CHECK_FALSE(nh.hermitian_flag());
  CHECK(nh.hermiticity_defect() > 0.5);
}

TEST_CASE("fermion channels") {
  auto f = build_basis(Species::FermionSpinHalf, 2, ParticleContent::fermions(1, 1));
  const auto ch = build_fermion_channels(f, odd_sites_profile(2), DirectGamma{0.5});
  const auto dx = build_D(f, odd_sites_profile(2), SiteQuantity::Density);
  const auto dy = build_D(f, odd_sites_profile(2), SiteQuantity::Magnetization);
  CHECK(eigenvalue_on(dx, *f, {1, 0, 1, 0}) == cplx(2.0));
  CHECK(eigenvalue_on(dy, *f, {1, 0, 1, 0}) == cplx(0.0));
  CHECK(eigenvalue_on(dx, *f, {1, 0, 0, 1}) == cplx(1.0));
  CHECK(eigenvalue_on(dy, *f, {1, 0, 0, 1}) == cplx(1.0));
  // gamma = 1/2 makes the prefactor sqrt(2 gamma) exactly 1.
  CHECK(max_abs(ch.x.op - dx) == 0.0);
  CHECK(max_abs(ch.y.op - dy) == 0.0);
  // Fully paired states have D_y = 0 everywhere.
  auto f4 = build_basis(Species::FermionSpinHalf, 4, ParticleContent::fermions(2, 2));
  const auto dy4 = build_D(f4, odd_sites_profile(4), SiteQuantity::Magnetization);
  for (std::size_t k = 0; k < f4->dimension(); ++k) {
    bool paired = true;
    for (int j = 0; j < 4; ++j) paired = paired && f4->occupation(k, j, Spin::Up) == f4->occupation(k, j, Spin::Down);
    if (paired) CHECK(dy4.diagonal()[Eigen::Index(k)] == cplx(0.0));
  }
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(2));
  CHECK_THROWS_AS(build_fermion_channels(b, odd_sites_profile(2), DirectGamma{1.0}), InvalidArgument);
}

TEST_CASE("component multiplicity") {
  CHECK(component_multiplicity(2) == 2);
  CHECK(component_multiplicity(3) == 6);
  CHECK(component_multiplicity(4) == 8);
  CHECK_THROWS_AS(component_multiplicity(1), InvalidArgument);
}

TEST_CASE("photon rate identity <c+c> = 2 kappa |C|^2 <D+D>") {
  auto b = build_basis(Species::Boson, 4, ParticleContent::bosons(3));
  CavityParameters p{0.9, cplx(1.1, 0.3), -0.4, 0.6};
  const auto D = build_D(b, r_mode_profile(4, 3));
  const auto ch = make_channel("D", D, MeasurementStrength(p));
  const double C2 = std::norm(rayleigh_coefficient(p.omega10, p.a0, p.delta_p, p.kappa));
  PhiloxStream rng(5, 1);
  for (int t = 0; t < 20; ++t) {
    Vec psi(D.dimension());
    for (auto& x : psi) x = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
    psi.normalize();
    const double lhs = ch.op.apply(psi).squaredNorm();
    const double rhs = 2.0 * p.kappa * C2 * D.apply(psi).squaredNorm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("profile files") {
  const auto dir = std::filesystem::temp_directory_path() / "qtraj_probe_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "diag.txt") << "# coefficients\n1 0\n0 0\n\n-1 0.5\n";
    std::ofstream(dir / "inter.txt") << "0 1 1 0\n1 0 1 0\n";
    std::ofstream(dir / "bad.txt") << "1 0\n2\n";
  }
  CHECK(load_diagonal_profile(dir / "diag.txt") == DiagonalProfile{1.0, 0.0, cplx(-1.0, 0.5)});
  const auto inter = load_intersite_profile(dir / "inter.txt", 3);
  CHECK(inter.coefficients(0, 1) == cplx(1.0));
  CHECK(inter.hermitian_pattern());
  CHECK_THROWS_WITH_AS(load_diagonal_profile(dir / "bad.txt"), doctest::Contains(":2:"), InvalidArgument);
  CHECK_THROWS_AS(load_intersite_profile(dir / "inter.txt", 1), InvalidArgument);
  CHECK_THROWS_AS(load_diagonal_profile(dir / "missing.txt"), InvalidArgument);
  std::filesystem::remove_all(dir);
}
