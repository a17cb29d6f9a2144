#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qtraj {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr cplx kI{0.0, 1.0};

// Precondition or argument violation (bad site index, mismatched basis, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Hilbert-space sector larger than the configured cap.
class DimensionCapExceeded : public std::runtime_error {
 public:
  DimensionCapExceeded(std::size_t dimension, std::size_t cap)
      : std::runtime_error("basis dimension " + std::to_string(dimension) +
                           " exceeds cap " + std::to_string(cap)),
        dimension_(dimension),
        cap_(cap) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t dimension_;
  std::size_t cap_;
};

// Integrator or jump-location failure; the run cannot continue.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qtraj
