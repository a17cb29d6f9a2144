#include "qtraj/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qtraj {

DiagonalProfile odd_sites_profile(int sites) {
  DiagonalProfile p(static_cast<std::size_t>(sites));
  for (int i = 0; i < sites; ++i) p[std::size_t(i)] = ((i + 1) % 2 == 1) ? 1.0 : 0.0;
  return p;
}

DiagonalProfile alternating_profile(int sites) {
  DiagonalProfile p(static_cast<std::size_t>(sites));
  for (int i = 0; i < sites; ++i) p[std::size_t(i)] = ((i + 1) % 2 == 1) ? 1.0 : -1.0;
  return p;
}

DiagonalProfile r_mode_profile(int sites, int modes) {
  if (modes < 1) throw InvalidArgument("R-mode profile needs R >= 1");
  DiagonalProfile p(static_cast<std::size_t>(sites));
  for (int i = 0; i < sites; ++i) {
    const int j = i + 1;
    // Exact values on the axes keep roots-of-unity sums free of round-off.
    const int phase = j % modes;
    if (phase == 0) {
      p[std::size_t(i)] = 1.0;
    } else if (2 * phase == modes) {
      p[std::size_t(i)] = -1.0;
    } else {
      p[std::size_t(i)] = std::polar(1.0, 2.0 * std::numbers::pi * phase / modes);
    }
  }
  return p;
}

InterSiteProfile InterSiteProfile::uniform(const LatticeSpec& lattice, cplx value) {
  InterSiteProfile p{DenseMatrix::Zero(lattice.sites, lattice.sites)};
  for (auto [i, j] : lattice.bonds()) {
    p.coefficients(i, j) = value;
    p.coefficients(j, i) = std::conj(value);
  }
  return p;
}

bool InterSiteProfile::hermitian_pattern(double tol) const {
  return (coefficients - coefficients.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

MeasurementStrength::MeasurementStrength(DirectGamma g) : source_(g) {
  if (!(g.gamma >= 0.0)) throw InvalidArgument("measurement strength gamma must be >= 0");
}

MeasurementStrength::MeasurementStrength(CavityParameters p) : source_(p) {
  if (!(p.kappa > 0.0)) throw InvalidArgument("cavity decay kappa must be > 0");
}

double MeasurementStrength::gamma() const {
  if (const auto* g = std::get_if<DirectGamma>(&source_)) return g->gamma;
  const auto& p = std::get<CavityParameters>(source_);
  return std::norm(rayleigh_coefficient(p.omega10, p.a0, p.delta_p, p.kappa)) * p.kappa;
}

cplx MeasurementStrength::jump_prefactor() const {
  if (const auto* g = std::get_if<DirectGamma>(&source_)) return std::sqrt(2.0 * g->gamma);
  const auto& p = std::get<CavityParameters>(source_);
  return std::sqrt(2.0 * p.kappa) * rayleigh_coefficient(p.omega10, p.a0, p.delta_p, p.kappa);
}

cplx rayleigh_coefficient(double omega10, cplx a0, double delta_p, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("cavity decay kappa must be > 0");
  return kI * omega10 * a0 / cplx(-kappa, delta_p);
}

SparseOperator build_D(const BasisPtr& basis, const DiagonalProfile& profile, SiteQuantity quantity) {
  if (profile.size() != static_cast<std::size_t>(basis->sites())) {
    throw InvalidArgument("profile has " + std::to_string(profile.size()) + " coefficients but lattice has " +
                          std::to_string(basis->sites()) + " sites");
  }
  const bool fermion = basis->species() == Species::FermionSpinHalf;
  if (!fermion && quantity == SiteQuantity::Magnetization) {
    throw InvalidArgument("magnetisation channel needs a fermionic basis");
  }
  std::vector<Triplet> t;
  t.reserve(basis->dimension());
  bool real = true;
  for (const auto& c : profile) real = real && c.imag() == 0.0;
  for (std::size_t k = 0; k < basis->dimension(); ++k) {
    cplx d = 0.0;
    for (int j = 0; j < basis->sites(); ++j) {
      const auto cj = profile[std::size_t(j)];
      if (cj == cplx(0.0)) continue;
      double q;
      if (!fermion) {
        q = basis->occupation(k, j);
      } else if (quantity == SiteQuantity::Density) {
        q = basis->occupation(k, j, Spin::Up) + basis->occupation(k, j, Spin::Down);
      } else {
        q = basis->occupation(k, j, Spin::Up) - basis->occupation(k, j, Spin::Down);
      }
      d += cj * q;
    }
    if (d != cplx(0.0)) t.emplace_back(Eigen::Index(k), Eigen::Index(k), d);
  }
  return SparseOperator::from_triplets(basis, t, real);
}

SparseOperator build_B(const BasisPtr& basis, const InterSiteProfile& profile, const LatticeSpec& lattice) {
  lattice.validate();
  const auto& c = profile.coefficients;
  if (c.rows() != lattice.sites || c.cols() != lattice.sites || basis->sites() != lattice.sites) {
    throw InvalidArgument("inter-site profile must be " + std::to_string(lattice.sites) + "x" +
                          std::to_string(lattice.sites));
  }
  std::vector<Triplet> t;
  for (int i = 0; i < lattice.sites; ++i) {
    for (int j = 0; j < lattice.sites; ++j) {
      if (c(i, j) == cplx(0.0)) continue;
      if (!lattice.neighbors(i, j)) {
        throw InvalidArgument("inter-site coefficient J(" + std::to_string(i) + "," + std::to_string(j) +
                              ") couples non-neighbouring sites");
      }
      if (basis->species() == Species::FermionSpinHalf) {
        for (Spin s : {Spin::Up, Spin::Down}) {
          detail::append_mode_hop(*basis, basis->mode(i, s), basis->mode(j, s), c(i, j), t);
        }
      } else {
        detail::append_mode_hop(*basis, i, j, c(i, j), t);
      }
    }
  }
  return SparseOperator::from_triplets(basis, t, profile.hermitian_pattern());
}

JumpChannel make_channel(std::string label, const SparseOperator& light_operator,
                         const MeasurementStrength& strength) {
  return {std::move(label), strength.jump_prefactor() * light_operator};
}

FermionChannels build_fermion_channels(const BasisPtr& basis, const DiagonalProfile& profile,
                                       const MeasurementStrength& strength) {
  if (basis->species() != Species::FermionSpinHalf) {
    throw InvalidArgument("two-polarisation channels need a fermionic basis");
  }
  return {make_channel("Dx", build_D(basis, profile, SiteQuantity::Density), strength),
          make_channel("Dy", build_D(basis, profile, SiteQuantity::Magnetization), strength)};
}

int component_multiplicity(int modes) {
  if (modes < 2) throw InvalidArgument("component multiplicity needs R >= 2");
  return modes == 2 ? 2 : 2 * modes;
}

std::vector<IntensityClass> intensity_classes(const SparseOperator& diagonal_op, double tol) {
  if (!diagonal_op.is_diagonal()) throw InvalidArgument("intensity classes need a diagonal operator");
  const Vec d = diagonal_op.diagonal();
  std::vector<IntensityClass> classes;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double intensity = std::norm(d[k]);
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const IntensityClass& c) { return std::abs(c.intensity - intensity) <= tol; });
    if (it == classes.end()) {
      classes.push_back({intensity, {}, {}});
      it = std::prev(classes.end());
    }
    it->states.push_back(std::size_t(k));
    const bool seen = std::any_of(it->distinct_values.begin(), it->distinct_values.end(),
                                  [&](cplx v) { return std::abs(v - d[k]) <= tol; });
    if (!seen) it->distinct_values.push_back(d[k]);
  }
  std::sort(classes.begin(), classes.end(),
            [](const IntensityClass& a, const IntensityClass& b) { return a.intensity < b.intensity; });
  return classes;
}

namespace {

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path, std::size_t width) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open profile file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof() || row.size() != width) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " numbers");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DiagonalProfile load_diagonal_profile(const std::filesystem::path& path) {
  DiagonalProfile p;
  for (const auto& row : read_numeric_rows(path, 2)) p.emplace_back(row[0], row[1]);
  return p;
}

InterSiteProfile load_intersite_profile(const std::filesystem::path& path, int sites) {
  InterSiteProfile p{DenseMatrix::Zero(sites, sites)};
  for (const auto& row : read_numeric_rows(path, 4)) {
    const int i = static_cast<int>(row[0]);
    const int j = static_cast<int>(row[1]);
    if (i < 0 || j < 0 || i >= sites || j >= sites || row[0] != i || row[1] != j) {
      throw InvalidArgument(path.string() + ": site index out of range");
    }
    p.coefficients(i, j) = cplx(row[2], row[3]);
  }
  return p;
}

}  // namespace qtraj
