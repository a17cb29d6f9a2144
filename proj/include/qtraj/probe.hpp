#pragma once

// Measurement geometries and the light-amplitude operators they induce.
//
// The scattered cavity field is a = C (D + B) with
//   D = sum_j J_jj n_j          (on-site densities)
//   B = sum_<i,j> J_ij b_i^+ b_j (inter-site coherences)
// and a photodetection applies c = sqrt(2 kappa) a. With gamma = |C|^2 kappa
// this gives c^+ c = 2 gamma a^+ a / |C|^2.
//
// Profiles use physical labels j = site + 1, so "odd sites" are indices
// 0, 2, 4, ... and the alternating profile starts with +1 at index 0.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

enum class ProfileKind { OddSites, Alternating, RMode, CustomDiagonal, InterSite };

using DiagonalProfile = std::vector<cplx>;

DiagonalProfile odd_sites_profile(int sites);
DiagonalProfile alternating_profile(int sites);
DiagonalProfile r_mode_profile(int sites, int modes);

// Inter-site coefficients J_ij as a dense L x L matrix; only
// nearest-neighbour entries may be nonzero.
struct InterSiteProfile {
  DenseMatrix coefficients;

  static InterSiteProfile uniform(const LatticeSpec& lattice, cplx value = 1.0);
  bool hermitian_pattern(double tol = 1e-14) const;
};

// gamma given directly, or derived from the cavity parameters.
struct DirectGamma {
  double gamma = 0.0;
};
struct CavityParameters {
  double omega10 = 0.0;
  cplx a0 = 0.0;
  double delta_p = 0.0;
  double kappa = 1.0;
};

class MeasurementStrength {
 public:
  MeasurementStrength() = default;
  MeasurementStrength(DirectGamma g);
  MeasurementStrength(CavityParameters p);

  double gamma() const;
  // Prefactor s of the jump operator c = s * (D or B); |s|^2 = 2 gamma.
  cplx jump_prefactor() const;
  bool is_direct() const { return std::holds_alternative<DirectGamma>(source_); }

 private:
  std::variant<DirectGamma, CavityParameters> source_{DirectGamma{}};
};

// C = i Omega10 a0 / (i Delta_p - kappa).
cplx rayleigh_coefficient(double omega10, cplx a0, double delta_p, double kappa);

// What a diagonal channel couples to on each site (fermions only; bosons
// always use the density).
enum class SiteQuantity { Density, Magnetization };

// sum_j J_jj q_j with q_j = n_j (bosons), rho_j or m_j (fermions).
SparseOperator build_D(const BasisPtr& basis, const DiagonalProfile& profile,
                       SiteQuantity quantity = SiteQuantity::Density);
// sum over neighbour pairs of J_ij b_i^+ b_j. Throws if a non-neighbour
// coefficient is nonzero. A non-Hermitian pattern is accepted; the result's
// hermitian flag is then false.
SparseOperator build_B(const BasisPtr& basis, const InterSiteProfile& profile, const LatticeSpec& lattice);

JumpChannel make_channel(std::string label, const SparseOperator& light_operator,
                         const MeasurementStrength& strength);

struct FermionChannels {
  JumpChannel x;  // density polarisation, D_x = sum J_jj rho_j
  JumpChannel y;  // magnetisation polarisation, D_y = sum J_jj m_j
};
FermionChannels build_fermion_channels(const BasisPtr& basis, const DiagonalProfile& profile,
                                       const MeasurementStrength& strength);

// Number of distinct atom-number components a measurement of |D|^2 cannot
// tell apart for R spatial modes: 2 for R = 2, 2R for R > 2.
int component_multiplicity(int modes);

// Fock states grouped by the measured intensity |d|^2 of a diagonal D.
struct IntensityClass {
  double intensity = 0.0;
  std::vector<cplx> distinct_values;  // distinct eigenvalues d in the class
  std::vector<std::size_t> states;
};
std::vector<IntensityClass> intensity_classes(const SparseOperator& diagonal_op, double tol = 1e-9);

// Text formats: one "re im" per line; inter-site "i j re im" per line
// (0-based indices). Blank lines and lines starting with '#' are skipped.
DiagonalProfile load_diagonal_profile(const std::filesystem::path& path);
InterSiteProfile load_intersite_profile(const std::filesystem::path& path, int sites);

}  // namespace qtraj
