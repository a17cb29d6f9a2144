#pragma once

// Fixed-particle-number occupation bases and number-conserving operators.
//
// Sites are 0-based throughout the library. A bosonic state stores one
// occupation per site. A spin-1/2 fermionic state stores 2L modes: the
// spin-up block (sites ascending) followed by the spin-down block. This
// mode order is also the canonical Jordan-Wigner order used for signs.
// States are enumerated in ascending lexicographic order of the stored
// occupation vector.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qtraj/types.hpp"

namespace qtraj {

enum class Species { Boson, FermionSpinHalf };
enum class Spin { Up, Down };

inline constexpr std::size_t kTrajectoryDimensionCap = 200'000;
inline constexpr std::size_t kMasterDimensionCap = 2'000;

struct ParticleContent {
  int n = 0;       // bosons
  int n_up = 0;    // fermions
  int n_down = 0;  // fermions

  static ParticleContent bosons(int n) { return {n, 0, 0}; }
  static ParticleContent fermions(int up, int down) { return {up + down, up, down}; }
};

// Number of states in a sector without enumerating it; saturates at SIZE_MAX.
std::size_t sector_dimension(Species species, int sites, const ParticleContent& content);

class FockBasis {
 public:
  FockBasis(Species species, int sites, ParticleContent content,
            std::size_t dimension_cap = kTrajectoryDimensionCap);

  Species species() const { return species_; }
  int sites() const { return sites_; }
  // Modes per state: L for bosons, 2L for spin-1/2 fermions.
  int modes() const { return modes_; }
  int particles() const { return content_.n; }
  const ParticleContent& content() const { return content_; }
  std::size_t dimension() const { return dimension_; }

  std::span<const std::uint8_t> state(std::size_t k) const {
    return {occupations_.data() + k * static_cast<std::size_t>(modes_),
            static_cast<std::size_t>(modes_)};
  }
  std::optional<std::size_t> index(std::span<const std::uint8_t> occupation) const;

  // Mode index of (site, spin); spin must be empty for bosons.
  int mode(int site, std::optional<Spin> spin = std::nullopt) const;
  // Occupation of a site; for fermions with no spin, the total density.
  int occupation(std::size_t k, int site, std::optional<Spin> spin = std::nullopt) const;

  bool same_sector(const FockBasis& other) const;

 private:
  Species species_;
  int sites_;
  int modes_;
  ParticleContent content_;
  std::size_t dimension_ = 0;
  std::vector<std::uint8_t> occupations_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr build_basis(Species species, int sites, ParticleContent content,
                     std::size_t dimension_cap = kTrajectoryDimensionCap);

// Complex sparse operator tied to a basis. The hermitian flag records the
// builder's claim only; nothing downstream relies on it.
class SparseOperator {
 public:
  SparseOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian = false);

  static SparseOperator zero(BasisPtr basis);
  static SparseOperator identity(BasisPtr basis);
  static SparseOperator from_triplets(BasisPtr basis, const std::vector<Triplet>& triplets,
                                      bool hermitian = false);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const SparseMatrix& matrix() const { return matrix_; }
  Eigen::Index dimension() const { return matrix_.rows(); }
  bool hermitian_flag() const { return hermitian_; }

  SparseOperator adjoint() const;
  Vec apply(const Vec& psi) const { return matrix_ * psi; }
  cplx expectation(const Vec& psi) const;  // <psi|A|psi> / <psi|psi>
  bool is_diagonal() const;
  Vec diagonal() const;
  DenseMatrix dense() const { return DenseMatrix(matrix_); }
  // max |A - A^dagger| entry.
  double hermiticity_defect() const;

  SparseOperator& operator+=(const SparseOperator& other);
  SparseOperator& operator-=(const SparseOperator& other);
  SparseOperator& operator*=(cplx scale);

  friend SparseOperator operator+(SparseOperator a, const SparseOperator& b) { return a += b; }
  friend SparseOperator operator-(SparseOperator a, const SparseOperator& b) { return a -= b; }
  friend SparseOperator operator*(cplx s, SparseOperator a) { return a *= s; }
  friend SparseOperator operator*(SparseOperator a, cplx s) { return a *= s; }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

 private:
  void require_same_basis(const SparseOperator& other) const;

  BasisPtr basis_;
  SparseMatrix matrix_;
  bool hermitian_;
};

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);
// Largest absolute matrix entry.
double max_abs(const SparseOperator& a);

// n_j, or for fermions with no spin given, n_{j,up} + n_{j,down}.
SparseOperator number_op(const BasisPtr& basis, int site, std::optional<Spin> spin = std::nullopt);
// Total particle number (per spin when given).
SparseOperator total_number_op(const BasisPtr& basis, std::optional<Spin> spin = std::nullopt);
// a^dagger_i a_j: moves one particle from site j to site i. For fermions with
// no spin given, the sum over both spin species.
SparseOperator hop_op(const BasisPtr& basis, int to_site, int from_site,
                      std::optional<Spin> spin = std::nullopt);

namespace detail {
// Appends the triplets of scale * a^dagger_{to} a_{from} on raw mode indices.
void append_mode_hop(const FockBasis& basis, int to_mode, int from_mode, cplx scale,
                     std::vector<Triplet>& out);
}  // namespace detail

}  // namespace qtraj
