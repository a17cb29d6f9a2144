#include "qtraj/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qtraj {
namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > kSaturated) return kSaturated;
  }
  return static_cast<std::size_t>(result);
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

// All length-`len` occupation vectors with `total` particles and per-mode
// maximum `max_occ`, in ascending lexicographic order.
void enumerate(int len, int total, int max_occ, std::vector<std::uint8_t>& prefix,
               std::vector<std::vector<std::uint8_t>>& out) {
  const int pos = static_cast<int>(prefix.size());
  if (pos == len) {
    if (total == 0) out.push_back(prefix);
    return;
  }
  const int remaining_modes = len - pos - 1;
  for (int n = 0; n <= std::min(total, max_occ); ++n) {
    if (total - n > remaining_modes * max_occ) continue;
    prefix.push_back(static_cast<std::uint8_t>(n));
    enumerate(len, total - n, max_occ, prefix, out);
    prefix.pop_back();
  }
}

std::vector<std::vector<std::uint8_t>> enumerate(int len, int total, int max_occ) {
  std::vector<std::vector<std::uint8_t>> out;
  std::vector<std::uint8_t> prefix;
  prefix.reserve(static_cast<std::size_t>(len));
  enumerate(len, total, max_occ, prefix, out);
  return out;
}

}  // namespace

std::size_t sector_dimension(Species species, int sites, const ParticleContent& content) {
  if (sites < 1) return 0;
  const auto l = static_cast<std::size_t>(sites);
  if (species == Species::Boson) {
    if (content.n < 0) return 0;
    return binomial(static_cast<std::size_t>(content.n) + l - 1, static_cast<std::size_t>(content.n));
  }
  if (content.n_up < 0 || content.n_down < 0) return 0;
  return saturating_mul(binomial(l, static_cast<std::size_t>(content.n_up)),
                        binomial(l, static_cast<std::size_t>(content.n_down)));
}

FockBasis::FockBasis(Species species, int sites, ParticleContent content, std::size_t dimension_cap)
    : species_(species),
      sites_(sites),
      modes_(species == Species::Boson ? sites : 2 * sites),
      content_(content) {
  if (sites < 1) throw InvalidArgument("basis needs at least one site, got " + std::to_string(sites));
  if (species == Species::Boson) {
    if (content.n < 0) throw InvalidArgument("negative particle number");
    if (content.n > 255) throw InvalidArgument("at most 255 bosons are supported");
    content_ = ParticleContent::bosons(content.n);
  } else {
    if (content.n_up < 0 || content.n_down < 0) throw InvalidArgument("negative particle number");
    if (content.n_up > sites || content.n_down > sites) {
      throw InvalidArgument("Pauli violation: N_up=" + std::to_string(content.n_up) +
                            ", N_down=" + std::to_string(content.n_down) + " on " +
                            std::to_string(sites) + " sites");
    }
    content_ = ParticleContent::fermions(content.n_up, content.n_down);
  }

  dimension_ = sector_dimension(species, sites, content_);
  if (dimension_ > dimension_cap) throw DimensionCapExceeded(dimension_, dimension_cap);

  occupations_.reserve(dimension_ * static_cast<std::size_t>(modes_));
  if (species == Species::Boson) {
    for (const auto& s : enumerate(sites, content_.n, content_.n)) {
      occupations_.insert(occupations_.end(), s.begin(), s.end());
    }
  } else {
    const auto ups = enumerate(sites, content_.n_up, 1);
    const auto downs = enumerate(sites, content_.n_down, 1);
    for (const auto& u : ups) {
      for (const auto& d : downs) {
        occupations_.insert(occupations_.end(), u.begin(), u.end());
        occupations_.insert(occupations_.end(), d.begin(), d.end());
      }
    }
  }
}

std::optional<std::size_t> FockBasis::index(std::span<const std::uint8_t> occupation) const {
  if (occupation.size() != static_cast<std::size_t>(modes_)) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = dimension_;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto s = state(mid);
    if (std::lexicographical_compare(s.begin(), s.end(), occupation.begin(), occupation.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < dimension_ && std::ranges::equal(state(lo), occupation)) return lo;
  return std::nullopt;
}

int FockBasis::mode(int site, std::optional<Spin> spin) const {
  if (site < 0 || site >= sites_) {
    throw InvalidArgument("site " + std::to_string(site) + " out of range [0, " +
                          std::to_string(sites_) + ")");
  }
  if (species_ == Species::Boson) {
    if (spin) throw InvalidArgument("bosonic basis has no spin label");
    return site;
  }
  if (!spin) throw InvalidArgument("fermionic mode needs a spin label");
  return *spin == Spin::Up ? site : sites_ + site;
}

int FockBasis::occupation(std::size_t k, int site, std::optional<Spin> spin) const {
  const auto s = state(k);
  if (species_ == Species::FermionSpinHalf && !spin) {
    return s[static_cast<std::size_t>(mode(site, Spin::Up))] +
           s[static_cast<std::size_t>(mode(site, Spin::Down))];
  }
  return s[static_cast<std::size_t>(mode(site, spin))];
}

bool FockBasis::same_sector(const FockBasis& other) const {
  return species_ == other.species_ && sites_ == other.sites_ && content_.n == other.content_.n &&
         content_.n_up == other.content_.n_up && content_.n_down == other.content_.n_down;
}

BasisPtr build_basis(Species species, int sites, ParticleContent content, std::size_t dimension_cap) {
  return std::make_shared<const FockBasis>(species, sites, content, dimension_cap);
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian)
    : basis_(std::move(basis)), matrix_(std::move(matrix)), hermitian_(hermitian) {
  if (!basis_) throw InvalidArgument("operator needs a basis");
  const auto d = static_cast<Eigen::Index>(basis_->dimension());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw InvalidArgument("operator dimensions do not match basis dimension " + std::to_string(d));
  }
  matrix_.prune(cplx(0.0));
  matrix_.makeCompressed();
}

SparseOperator SparseOperator::zero(BasisPtr basis) {
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  return {std::move(basis), SparseMatrix(d, d), true};
}

SparseOperator SparseOperator::identity(BasisPtr basis) {
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  SparseMatrix m(d, d);
  m.setIdentity();
  return {std::move(basis), std::move(m), true};
}

SparseOperator SparseOperator::from_triplets(BasisPtr basis, const std::vector<Triplet>& triplets,
                                             bool hermitian) {
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  SparseMatrix m(d, d);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {std::move(basis), std::move(m), hermitian};
}

SparseOperator SparseOperator::adjoint() const {
  SparseMatrix adj = matrix_.adjoint();
  return {basis_, std::move(adj), hermitian_};
}

cplx SparseOperator::expectation(const Vec& psi) const {
  const double norm2 = psi.squaredNorm();
  if (norm2 == 0.0) throw InvalidArgument("expectation value of a zero vector");
  return psi.dot(matrix_ * psi) / norm2;
}

bool SparseOperator::is_diagonal() const {
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.col() != it.row() && it.value() != cplx(0.0)) return false;
    }
  }
  return true;
}

Vec SparseOperator::diagonal() const { return matrix_.diagonal(); }

double SparseOperator::hermiticity_defect() const {
  const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double worst = 0.0;
  for (Eigen::Index r = 0; r < diff.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

void SparseOperator::require_same_basis(const SparseOperator& other) const {
  if (basis_ != other.basis_ && !basis_->same_sector(*other.basis_)) {
    throw InvalidArgument("operators act on different bases");
  }
}

SparseOperator& SparseOperator::operator+=(const SparseOperator& other) {
  require_same_basis(other);
  matrix_ += other.matrix_;
  matrix_.prune(cplx(0.0));
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

SparseOperator& SparseOperator::operator-=(const SparseOperator& other) {
  require_same_basis(other);
  matrix_ -= other.matrix_;
  matrix_.prune(cplx(0.0));
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

SparseOperator& SparseOperator::operator*=(cplx scale) {
  matrix_ *= scale;
  matrix_.prune(cplx(0.0));
  hermitian_ = hermitian_ && scale.imag() == 0.0;
  return *this;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  a.require_same_basis(b);
  SparseMatrix prod = a.matrix_ * b.matrix_;
  return {a.basis_, std::move(prod), false};
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) { return a * b - b * a; }

double max_abs(const SparseOperator& a) {
  double worst = 0.0;
  const auto& m = a.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace detail {

void append_mode_hop(const FockBasis& basis, int to_mode, int from_mode, cplx scale,
                     std::vector<Triplet>& out) {
  const bool fermion = basis.species() == Species::FermionSpinHalf;
  const auto to = static_cast<std::size_t>(to_mode);
  const auto from = static_cast<std::size_t>(from_mode);
  std::vector<std::uint8_t> target(static_cast<std::size_t>(basis.modes()));

  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const auto s = basis.state(k);
    if (s[from] == 0) continue;
    double amplitude = 0.0;
    if (to == from) {
      amplitude = s[from];
      out.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), scale * amplitude);
      continue;
    }
    if (fermion) {
      if (s[to] != 0) continue;
      // Parity of occupied modes strictly between the two modes.
      const auto lo = std::min(to, from);
      const auto hi = std::max(to, from);
      int crossed = 0;
      for (std::size_t m = lo + 1; m < hi; ++m) crossed += s[m];
      amplitude = (crossed % 2 == 0) ? 1.0 : -1.0;
    } else {
      amplitude = std::sqrt(static_cast<double>(s[from])) * std::sqrt(static_cast<double>(s[to]) + 1.0);
    }
    std::copy(s.begin(), s.end(), target.begin());
    target[from] -= 1;
    target[to] += 1;
    const auto row = basis.index(target);
    if (!row) throw InvalidArgument("hop left the particle-number sector");
    out.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(k), scale * amplitude);
  }
}

}  // namespace detail

SparseOperator number_op(const BasisPtr& basis, int site, std::optional<Spin> spin) {
  if (basis->species() == Species::FermionSpinHalf && !spin) {
    return number_op(basis, site, Spin::Up) + number_op(basis, site, Spin::Down);
  }
  const int m = basis->mode(site, spin);
  std::vector<Triplet> t;
  t.reserve(basis->dimension());
  for (std::size_t k = 0; k < basis->dimension(); ++k) {
    const auto n = basis->state(k)[static_cast<std::size_t>(m)];
    if (n != 0) t.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), double(n));
  }
  return SparseOperator::from_triplets(basis, t, true);
}

SparseOperator total_number_op(const BasisPtr& basis, std::optional<Spin> spin) {
  auto total = SparseOperator::zero(basis);
  for (int j = 0; j < basis->sites(); ++j) total += number_op(basis, j, spin);
  return total;
}

SparseOperator hop_op(const BasisPtr& basis, int to_site, int from_site, std::optional<Spin> spin) {
  if (to_site == from_site) {
    throw InvalidArgument("hop_op needs distinct sites; use number_op for i == j");
  }
  std::vector<Triplet> t;
  if (basis->species() == Species::FermionSpinHalf && !spin) {
    for (Spin s : {Spin::Up, Spin::Down}) {
      detail::append_mode_hop(*basis, basis->mode(to_site, s), basis->mode(from_site, s), 1.0, t);
    }
  } else {
    detail::append_mode_hop(*basis, basis->mode(to_site, spin), basis->mode(from_site, spin), 1.0, t);
  }
  return SparseOperator::from_triplets(basis, t, false);
}

}  // namespace qtraj
