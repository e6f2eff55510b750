#pragma once

#include <vector>

#include "grom/tensor.hpp"

namespace grom {

/// Matrix with orthonormal columns in canonical sign form: the entry of
/// largest magnitude in every column is positive (lowest row wins ties).
struct FactorMatrix {
  Matrix values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  Vector eigenvalues;
  Matrix eigenvectors;
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver. Iterates until every off-diagonal entry is below
/// `rel_tol` times the Frobenius norm of `a`.
SymmetricEigen jacobi_eigen(const Matrix& a, double rel_tol = 1e-12, int max_sweeps = 100);

struct TruncatedSvd {
  FactorMatrix u;
  /// Full spectrum of min(rows, cols) singular values, descending.
  std::vector<double> spectrum;
  int rank = 0;

  std::vector<double> retained() const {
    return {spectrum.begin(), spectrum.begin() + rank};
  }
};

/// Singular values below this fraction of the largest are counted as zero.
inline constexpr double kSingularFloor = 1e-12;

/// Smallest rank whose leading singular values carry at least
/// `energy_threshold` of the squared spectrum. A threshold of 1 keeps every
/// nonzero singular value; an all-zero matrix yields rank 0 and an empty U.
TruncatedSvd truncated_svd(const Matrix& m, double energy_threshold);

/// Flip column signs into canonical form.
void canonicalize_signs(Matrix& columns);

}  // namespace grom
