#include "qtraj/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace qtraj {

ModePartition ModePartition::from_assignment(std::vector<int> assignment) {
  if (assignment.empty()) throw InvalidArgument("mode partition needs at least one site");
  const int modes = *std::max_element(assignment.begin(), assignment.end()) + 1;
  if (*std::min_element(assignment.begin(), assignment.end()) < 0) throw InvalidArgument("negative mode label");
  std::vector<bool> used(static_cast<std::size_t>(modes), false);
  for (int m : assignment) used[std::size_t(m)] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) throw InvalidArgument("mode partition has an empty mode");
  return {modes, std::move(assignment)};
}

ModePartition ModePartition::odd_even(int sites) {
  std::vector<int> a(static_cast<std::size_t>(sites));
  for (int i = 0; i < sites; ++i) a[std::size_t(i)] = i % 2;
  return from_assignment(std::move(a));
}

ModePartition ModePartition::from_profile(const DiagonalProfile& profile, double tol) {
  std::vector<cplx> values;
  std::vector<int> a;
  for (const auto& c : profile) {
    auto it = std::find_if(values.begin(), values.end(), [&](cplx v) { return std::abs(v - c) <= tol; });
    if (it == values.end()) {
      values.push_back(c);
      a.push_back(static_cast<int>(values.size()) - 1);
    } else {
      a.push_back(static_cast<int>(it - values.begin()));
    }
  }
  return from_assignment(std::move(a));
}

std::vector<int> ModePartition::sites_of(int mode) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    if (assignment[j] == mode) out.push_back(static_cast<int>(j));
  }
  return out;
}

namespace {

void check_sites(const FockBasis& basis, std::span<const int> sites) {
  std::vector<bool> seen(static_cast<std::size_t>(basis.sites()), false);
  for (int s : sites) {
    if (s < 0 || s >= basis.sites()) throw InvalidArgument("site " + std::to_string(s) + " out of range");
    if (seen[std::size_t(s)]) throw InvalidArgument("site " + std::to_string(s) + " listed twice");
    seen[std::size_t(s)] = true;
  }
}

void check_partition(const FockBasis& basis, const ModePartition& p) {
  if (p.assignment.size() != static_cast<std::size_t>(basis.sites())) {
    throw InvalidArgument("partition covers " + std::to_string(p.assignment.size()) + " sites, lattice has " +
                          std::to_string(basis.sites()));
  }
}

void check_normalised(const Vec& psi, const FockBasis& basis) {
  if (psi.size() != static_cast<Eigen::Index>(basis.dimension())) {
    throw InvalidArgument("state dimension does not match the basis");
  }
  if (std::abs(psi.norm() - 1.0) > 1e-8) throw InvalidArgument("state must be normalised");
}

int zone_count(const FockBasis& basis, std::size_t k, std::span<const int> sites) {
  int n = 0;
  for (int s : sites) n += basis.occupation(k, s);
  return n;
}

// tr(A rho) with A sparse.
cplx trace_product(const SparseMatrix& a, const DenseMatrix& rho) {
  cplx acc = 0.0;
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) acc += it.value() * rho(it.col(), i);
  }
  return acc;
}

}  // namespace

SparseOperator zone_number_op(const BasisPtr& basis, std::span<const int> sites) {
  check_sites(*basis, sites);
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < basis->dimension(); ++k) {
    const int n = zone_count(*basis, k, sites);
    if (n != 0) t.emplace_back(Eigen::Index(k), Eigen::Index(k), double(n));
  }
  return SparseOperator::from_triplets(basis, t, true);
}

SparseOperator mode_number_op(const BasisPtr& basis, const ModePartition& partition, int mode) {
  check_partition(*basis, partition);
  return zone_number_op(basis, partition.sites_of(mode));
}

double expectation(const SparseOperator& a, const Vec& psi) { return a.expectation(psi).real(); }

double variance(const SparseOperator& a, const Vec& psi) {
  const double n2 = psi.squaredNorm();
  const Vec ap = a.apply(psi);
  const cplx mean = psi.dot(ap) / n2;
  return ap.squaredNorm() / n2 - std::norm(mean);
}

std::vector<double> mode_number_distribution(const Vec& psi, const FockBasis& basis, const ModePartition& partition,
                                             int mode) {
  check_partition(basis, partition);
  check_normalised(psi, basis);
  if (mode < 0 || mode >= partition.modes) throw InvalidArgument("mode index out of range");
  const auto sites = partition.sites_of(mode);
  std::vector<double> p(static_cast<std::size_t>(basis.particles()) + 1, 0.0);
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    p[std::size_t(zone_count(basis, k, sites))] += std::norm(psi[Eigen::Index(k)]);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw NumericalFailure("mode distribution does not sum to one");
  return p;
}

double number_correlations(const Vec& psi, const FockBasis& basis, std::span<const int> zone_a,
                           std::span<const int> zone_b) {
  check_sites(basis, zone_a);
  check_sites(basis, zone_b);
  for (int s : zone_a) {
    if (std::find(zone_b.begin(), zone_b.end(), s) != zone_b.end()) {
      throw InvalidArgument("correlation zones overlap at site " + std::to_string(s));
    }
  }
  check_normalised(psi, basis);
  double na = 0.0, nb = 0.0, nab = 0.0;
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const double p = std::norm(psi[Eigen::Index(k)]);
    const int a = zone_count(basis, k, zone_a);
    const int b = zone_count(basis, k, zone_b);
    na += p * a;
    nb += p * b;
    nab += p * a * b;
  }
  return nab - na * nb;
}

double entanglement_entropy(const Vec& psi, const FockBasis& basis, std::span<const int> sites_a) {
  check_sites(basis, sites_a);
  check_normalised(psi, basis);
  const bool fermion = basis.species() == Species::FermionSpinHalf;

  std::vector<bool> in_a(static_cast<std::size_t>(basis.modes()), false);
  for (int s : sites_a) {
    if (fermion) {
      in_a[std::size_t(basis.mode(s, Spin::Up))] = true;
      in_a[std::size_t(basis.mode(s, Spin::Down))] = true;
    } else {
      in_a[std::size_t(s)] = true;
    }
  }

  // Schmidt blocks labelled by the particle number in A.
  struct Block {
    std::map<std::vector<std::uint8_t>, Eigen::Index> rows, cols;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, cplx>> entries;
  };
  std::map<int, Block> blocks;
  std::vector<std::uint8_t> key_a, key_b;
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const cplx amp = psi[Eigen::Index(k)];
    if (amp == cplx(0.0)) continue;
    const auto occ = basis.state(k);
    key_a.clear();
    key_b.clear();
    int n_a = 0;
    int b_before = 0;
    int crossings = 0;
    for (int m = 0; m < basis.modes(); ++m) {
      const auto n = occ[std::size_t(m)];
      if (in_a[std::size_t(m)]) {
        key_a.push_back(n);
        n_a += n;
        // Moving this A fermion in front of every earlier B fermion.
        if (n) crossings += b_before;
      } else {
        key_b.push_back(n);
        b_before += n;
      }
    }
    const double sign = (fermion && (crossings & 1)) ? -1.0 : 1.0;
    auto& blk = blocks[n_a];
    const auto r = blk.rows.try_emplace(key_a, Eigen::Index(blk.rows.size())).first->second;
    const auto c = blk.cols.try_emplace(key_b, Eigen::Index(blk.cols.size())).first->second;
    blk.entries.emplace_back(r, c, sign * amp);
  }

  double entropy = 0.0;
  for (const auto& [n_a, blk] : blocks) {
    DenseMatrix m = DenseMatrix::Zero(Eigen::Index(blk.rows.size()), Eigen::Index(blk.cols.size()));
    for (const auto& [r, c, v] : blk.entries) m(r, c) = v;
    Eigen::BDCSVD<DenseMatrix> svd(m);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double lam = svd.singularValues()[i] * svd.singularValues()[i];
      if (lam > 1e-300) entropy -= lam * std::log(lam);
    }
  }
  return std::max(entropy, 0.0);
}

double imbalance(const Vec& psi, const FockBasis& basis, const ModePartition& partition) {
  check_partition(basis, partition);
  if (partition.modes != 2) throw InvalidArgument("imbalance needs a two-mode partition");
  check_normalised(psi, basis);
  if (basis.particles() == 0) throw InvalidArgument("imbalance of an empty lattice");
  const auto s0 = partition.sites_of(0);
  const auto s1 = partition.sites_of(1);
  double z = 0.0;
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    z += std::norm(psi[Eigen::Index(k)]) * (zone_count(basis, k, s0) - zone_count(basis, k, s1));
  }
  return z / basis.particles();
}

std::vector<double> site_densities(const Vec& psi, const FockBasis& basis) {
  check_normalised(psi, basis);
  std::vector<double> n(static_cast<std::size_t>(basis.sites()), 0.0);
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const double p = std::norm(psi[Eigen::Index(k)]);
    for (int j = 0; j < basis.sites(); ++j) n[std::size_t(j)] += p * basis.occupation(k, j);
  }
  return n;
}

// ---------------------------------------------------------------------------

void ObservableSet::push(std::string name, Entry entry) {
  if (std::find(columns_.begin(), columns_.end(), name) != columns_.end()) {
    throw InvalidArgument("duplicate observable column '" + name + "'");
  }
  if (!entry.a.basis().same_sector(*basis_)) throw InvalidArgument("observable '" + name + "' on a different basis");
  columns_.push_back(std::move(name));
  entries_.push_back(std::move(entry));
}

void ObservableSet::add_mean(const std::string& name, const SparseOperator& op) {
  const auto zero = SparseOperator::zero(basis_);
  push(name, {Kind::MeanRe, op, zero, zero, {}});
  if (op.hermiticity_defect() > 1e-12) push(name + "_im", {Kind::MeanIm, op, zero, zero, {}});
}

void ObservableSet::add_variance(const std::string& name, const SparseOperator& op) {
  push(name, {Kind::Variance, op, SparseOperator::zero(basis_), op.adjoint() * op, {}});
}

void ObservableSet::add_covariance(const std::string& name, const SparseOperator& a, const SparseOperator& b) {
  push(name, {Kind::Covariance, a, b, a * b, {}});
}

void ObservableSet::add_entropy(const std::string& name, std::vector<int> sites_a) {
  check_sites(*basis_, sites_a);
  const auto zero = SparseOperator::zero(basis_);
  push(name, {Kind::Entropy, zero, zero, zero, std::move(sites_a)});
}

void ObservableSet::add_site_densities() {
  for (int j = 0; j < basis_->sites(); ++j) add_mean("n_" + std::to_string(j), number_op(basis_, j));
}

void ObservableSet::add_mode_distribution(const std::string& prefix, const ModePartition& partition, int mode) {
  check_partition(*basis_, partition);
  const auto sites = partition.sites_of(mode);
  for (int m = 0; m <= basis_->particles(); ++m) {
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < basis_->dimension(); ++k) {
      if (zone_count(*basis_, k, sites) == m) t.emplace_back(Eigen::Index(k), Eigen::Index(k), 1.0);
    }
    add_mean(prefix + "_" + std::to_string(m), SparseOperator::from_triplets(basis_, t, true));
  }
}

std::vector<double> ObservableSet::evaluate(const Vec& psi) const {
  check_normalised(psi, *basis_);
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    switch (e.kind) {
      case Kind::MeanRe:
        out.push_back(psi.dot(e.a.apply(psi)).real());
        break;
      case Kind::MeanIm:
        out.push_back(psi.dot(e.a.apply(psi)).imag());
        break;
      case Kind::Variance:
        out.push_back(variance(e.a, psi));
        break;
      case Kind::Covariance: {
        const cplx ab = psi.dot(e.product.apply(psi));
        const cplx a = psi.dot(e.a.apply(psi));
        const cplx b = psi.dot(e.b.apply(psi));
        out.push_back((ab - a * b).real());
        break;
      }
      case Kind::Entropy:
        out.push_back(entanglement_entropy(psi, *basis_, e.sites));
        break;
    }
  }
  return out;
}

std::vector<double> ObservableSet::evaluate(const DenseMatrix& rho) const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    switch (e.kind) {
      case Kind::MeanRe:
        out.push_back(trace_product(e.a.matrix(), rho).real());
        break;
      case Kind::MeanIm:
        out.push_back(trace_product(e.a.matrix(), rho).imag());
        break;
      case Kind::Variance:
        out.push_back(trace_product(e.product.matrix(), rho).real() - std::norm(trace_product(e.a.matrix(), rho)));
        break;
      case Kind::Covariance: {
        const cplx a = trace_product(e.a.matrix(), rho);
        const cplx b = trace_product(e.b.matrix(), rho);
        out.push_back((trace_product(e.product.matrix(), rho) - a * b).real());
        break;
      }
      case Kind::Entropy:
        out.push_back(std::numeric_limits<double>::quiet_NaN());
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t RunRecord::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("run '" + traj_id + "' has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> RunRecord::series(const std::string& name) const {
  const auto c = column_index(name);
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[c]);
  return out;
}

EnsembleSeries ensemble_mean(std::span<const RunRecord> runs, const std::string& column) {
  if (runs.empty()) throw InvalidArgument("ensemble is empty");
  EnsembleSeries s;
  s.times = runs.front().times;
  s.runs = runs.size();
  const std::size_t nt = s.times.size();
  std::vector<double> sum(nt, 0.0), sum2(nt, 0.0);
  for (const auto& r : runs) {
    if (r.times != s.times) throw InvalidArgument("run '" + r.traj_id + "' has a different time grid");
    const auto c = r.column_index(column);
    for (std::size_t i = 0; i < nt; ++i) {
      const double v = r.values[i][c];
      sum[i] += v;
      sum2[i] += v * v;
    }
  }
  const double m = static_cast<double>(runs.size());
  s.mean.resize(nt);
  s.std_error.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    s.mean[i] = sum[i] / m;
    if (runs.size() < 2) {
      s.std_error[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double var = std::max(0.0, (sum2[i] - m * s.mean[i] * s.mean[i]) / (m - 1.0));
      s.std_error[i] = std::sqrt(var / m);
    }
  }
  return s;
}

EnsembleSeries traj_avg_variance(std::span<const RunRecord> runs, const std::string& variance_column) {
  return ensemble_mean(runs, variance_column);
}

WindowMean late_window_mean(const EnsembleSeries& series, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("window fraction must be in (0, 1]");
  if (series.times.empty()) throw InvalidArgument("empty series");
  const double t_end = series.times.back();
  const double t_start = series.times.front() + (1.0 - fraction) * (t_end - series.times.front());
  WindowMean w;
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] + 1e-12 < t_start) continue;
    w.mean += series.mean[i];
    w.std_error += series.std_error[i];
    ++n;
  }
  w.mean /= static_cast<double>(n);
  w.std_error /= static_cast<double>(n);
  return w;
}

}  // namespace qtraj
