#include <doctest.h>

#include "oracles.hpp"
#include "qtraj/fock.hpp"

using namespace qtraj;

namespace {

double max_diff(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Vec state_of(const FockBasis& b, std::vector<std::uint8_t> occ) {
  Vec v = Vec::Zero(Eigen::Index(b.dimension()));
  v[Eigen::Index(*b.index(occ))] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("basis dimensions") {
  CHECK(build_basis(Species::Boson, 4, ParticleContent::bosons(2))->dimension() == 10);
  CHECK(build_basis(Species::FermionSpinHalf, 2, ParticleContent::fermions(1, 1))->dimension() == 4);
  CHECK(build_basis(Species::Boson, 6, ParticleContent::bosons(6))->dimension() == 462);
  CHECK(sector_dimension(Species::Boson, 30, ParticleContent::bosons(30)) ==
        std::size_t(59132290782430712ULL));
}

TEST_CASE("basis invariants: particle number, ordering, bijective index") {
  for (auto [species, content] :
       {std::pair{Species::Boson, ParticleContent::bosons(3)}, std::pair{Species::FermionSpinHalf,
                                                                          ParticleContent::fermions(2, 1)}}) {
    auto b = build_basis(species, 4, content);
    CHECK(b->dimension() == sector_dimension(species, 4, content));
    for (std::size_t k = 0; k < b->dimension(); ++k) {
      auto s = b->state(k);
      CHECK(b->index(s) == k);
      if (k > 0) {
        auto prev = b->state(k - 1);
        CHECK(std::lexicographical_compare(prev.begin(), prev.end(), s.begin(), s.end()));
      }
      if (species == Species::Boson) {
        int n = 0;
        for (auto x : s) n += x;
        CHECK(n == 3);
      } else {
        int up = 0, dn = 0;
        for (int j = 0; j < 4; ++j) {
          CHECK(b->occupation(k, j, Spin::Up) <= 1);
          up += b->occupation(k, j, Spin::Up);
          dn += b->occupation(k, j, Spin::Down);
        }
        CHECK(up == 2);
        CHECK(dn == 1);
      }
    }
  }
}

TEST_CASE("basis errors") {
  CHECK_THROWS_AS(build_basis(Species::FermionSpinHalf, 2, ParticleContent::fermions(3, 0)), InvalidArgument);
  CHECK_THROWS_AS(build_basis(Species::Boson, 0, ParticleContent::bosons(1)), InvalidArgument);
  try {
    build_basis(Species::Boson, 12, ParticleContent::bosons(12));
    FAIL("expected the cap to trigger");
  } catch (const DimensionCapExceeded& e) {
    CHECK(e.dimension() == 1352078);
    CHECK(e.cap() == kTrajectoryDimensionCap);
  }
  CHECK_NOTHROW(build_basis(Species::Boson, 12, ParticleContent::bosons(12), 2'000'000));
}

TEST_CASE("number operator") {
  auto b = build_basis(Species::Boson, 2, ParticleContent::bosons(2));
  const auto n0 = number_op(b, 0);
  CHECK(n0.is_diagonal());
  CHECK(n0.expectation(state_of(*b, {2, 0})).real() == 2.0);
  auto sum = number_op(b, 0) + number_op(b, 1);
  CHECK(max_diff(sum.dense(), 2.0 * SparseOperator::identity(b).dense()) == 0.0);
  CHECK_THROWS_AS(number_op(b, 2), InvalidArgument);

  auto f = build_basis(Species::FermionSpinHalf, 2, ParticleContent::fermions(1, 1));
  std::vector<std::uint8_t> doublon{1, 0, 1, 0};
  CHECK(number_op(f, 0, Spin::Up).expectation(state_of(*f, doublon)).real() == 1.0);
  CHECK(number_op(f, 0).expectation(state_of(*f, doublon)).real() == 2.0);
}

TEST_CASE("hop operator examples") {
  auto b1 = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  CHECK(hop_op(b1, 0, 1).apply(state_of(*b1, {0, 1})).isApprox(state_of(*b1, {1, 0})));
  auto b2 = build_basis(Species::Boson, 2, ParticleContent::bosons(2));
  CHECK(hop_op(b2, 0, 1).apply(state_of(*b2, {1, 1})).isApprox(std::sqrt(2.0) * state_of(*b2, {2, 0})));
  CHECK_THROWS_AS(hop_op(b2, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(hop_op(b2, 0, 5), InvalidArgument);
}

TEST_CASE("bosonic hop matches the dense ladder-operator oracle") {
  for (auto [L, N] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{3, 3}, std::pair{4, 2}}) {
    auto b = build_basis(Species::Boson, L, ParticleContent::bosons(N));
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        if (i == j) continue;
        const auto h = hop_op(b, i, j);
        CHECK(max_diff(h.dense(), oracle::mode_hop(*b, i, j)) < 1e-14);
        CHECK(max_diff(h.adjoint().dense(), hop_op(b, j, i).dense()) == 0.0);
        CHECK((h + hop_op(b, j, i)).hermiticity_defect() == 0.0);
      }
    }
  }
}

TEST_CASE("fermionic hop matches the dense Jordan-Wigner oracle") {
  for (auto [L, up, dn] : {std::tuple{2, 1, 1}, std::tuple{3, 2, 1}, std::tuple{3, 1, 2}, std::tuple{4, 2, 2}}) {
    auto b = build_basis(Species::FermionSpinHalf, L, ParticleContent::fermions(up, dn));
    for (Spin s : {Spin::Up, Spin::Down}) {
      for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
          if (i == j) continue;
          const auto h = hop_op(b, i, j, s);
          CHECK(max_diff(h.dense(), oracle::mode_hop(*b, b->mode(i, s), b->mode(j, s))) < 1e-14);
          CHECK(max_diff(h.adjoint().dense(), hop_op(b, j, i, s).dense()) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("fermionic anticommutation consistency") {
  // f+_i f_j f+_j f_i + f+_j f_i f+_i f_j = n_i (1 - n_j) + n_j (1 - n_i) per spin.
  auto b = build_basis(Species::FermionSpinHalf, 3, ParticleContent::fermions(2, 1));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const auto lhs = hop_op(b, i, j, Spin::Up) * hop_op(b, j, i, Spin::Up) +
                       hop_op(b, j, i, Spin::Up) * hop_op(b, i, j, Spin::Up);
      const auto ni = number_op(b, i, Spin::Up), nj = number_op(b, j, Spin::Up);
      const auto id = SparseOperator::identity(b);
      const auto rhs = ni * (id - nj) + nj * (id - ni);
      CHECK(max_abs(lhs - rhs) < 1e-14);
    }
  }
}

TEST_CASE("number conservation of every builder") {
  for (int L = 2; L <= 4; ++L) {
    for (int N = 1; N <= 3; ++N) {
      auto b = build_basis(Species::Boson, L, ParticleContent::bosons(N));
      const auto ntot = total_number_op(b);
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
          if (i != j) CHECK(max_abs(commutator(hop_op(b, i, j), ntot)) < 1e-12);
    }
  }
  auto f = build_basis(Species::FermionSpinHalf, 3, ParticleContent::fermions(1, 2));
  for (Spin s : {Spin::Up, Spin::Down}) {
    for (Spin t : {Spin::Up, Spin::Down}) {
      CHECK(max_abs(commutator(hop_op(f, 0, 2, s), total_number_op(f, t))) < 1e-12);
    }
  }
}

TEST_CASE("operator algebra keeps bases apart") {
  auto a = build_basis(Species::Boson, 2, ParticleContent::bosons(1));
  auto c = build_basis(Species::Boson, 2, ParticleContent::bosons(2));
  CHECK_THROWS_AS(number_op(a, 0) + number_op(c, 0), InvalidArgument);
  const auto h = hop_op(c, 0, 1);
  CHECK(max_diff(h.adjoint().adjoint().dense(), h.dense()) == 0.0);
}
