#include "grom/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "grom/error.hpp"

namespace grom {

SymmetricEigen jacobi_eigen(const Matrix& a_in, double rel_tol, int max_sweeps) {
  if (a_in.rows() != a_in.cols()) throw ValidationError("jacobi_eigen: matrix is not square");
  const Eigen::Index n = a_in.rows();
  Matrix a = a_in;
  Matrix v = Matrix::Identity(n, n);
  const double tol = rel_tol * a.norm();

  auto max_off = [&]() {
    double m = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  int sweep = 0;
  while (max_off() > tol) {
    if (sweep++ >= max_sweeps) {
      throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) +
                           " sweeps");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol * 1e-3) continue;
        // Rotation annihilating a(p,q) (Golub & Van Loan, symmetric Schur).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  SymmetricEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  out.sweeps = sweep;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

void canonicalize_signs(Matrix& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
      if (std::abs(columns(r, c)) > best_abs) {
        best_abs = std::abs(columns(r, c));
        best = r;
      }
    }
    if (columns.rows() > 0 && columns(best, c) < 0.0) columns.col(c) *= -1.0;
  }
}

namespace {

// Modified Gram-Schmidt, applied twice.
void orthonormalize(Matrix& q) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      for (Eigen::Index j = 0; j < k; ++j) q.col(k) -= q.col(j).dot(q.col(k)) * q.col(j);
      const double nrm = q.col(k).norm();
      if (nrm == 0.0) throw NumericalError("truncated_svd: left singular vector collapsed");
      q.col(k) /= nrm;
    }
  }
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& m, double energy_threshold) {
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
    throw ValidationError("truncated_svd: energy threshold must lie in (0, 1]");
  }
  if (!m.allFinite()) throw ValidationError("truncated_svd: matrix has non-finite entries");

  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const Eigen::Index kmax = std::min(rows, cols);
  TruncatedSvd out;
  out.spectrum.assign(static_cast<std::size_t>(kmax), 0.0);
  out.u.values.resize(rows, 0);
  if (kmax == 0 || m.norm() == 0.0) return out;

  // One-sided Jacobi on the thinner orientation: rotate columns of X until
  // they are mutually orthogonal. This diagonalizes the Gram matrix X^T X
  // without forming it. For rows <= cols, X = m^T and the accumulated
  // rotations are the left singular vectors; otherwise X = m and the
  // normalized columns are.
  const bool transpose = rows <= cols;
  Matrix x = transpose ? Matrix(m.transpose()) : m;
  const Eigen::Index k = x.cols();
  Matrix v = Matrix::Identity(k, k);
  constexpr double kOrthTol = 1e-15;
  constexpr int kMaxSweeps = 100;
  bool rotated = true;
  int sweep = 0;
  while (rotated) {
    if (sweep++ >= kMaxSweeps) throw NumericalError("truncated_svd: Jacobi sweeps did not converge");
    rotated = false;
    for (Eigen::Index p = 0; p < k - 1; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) {
        const double alpha = x.col(p).squaredNorm();
        const double beta = x.col(q).squaredNorm();
        const double gamma = x.col(p).dot(x.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          const double xp = x(r, p), xq = x(r, q);
          x(r, p) = c * xp - s * xq;
          x(r, q) = s * xp + c * xq;
        }
        for (Eigen::Index r = 0; r < k; ++r) {
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
  }

  std::vector<double> norms(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) norms[static_cast<std::size_t>(c)] = x.col(c).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
  });
  for (Eigen::Index c = 0; c < kmax; ++c) {
    out.spectrum[static_cast<std::size_t>(c)] = norms[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
  }

  const double floor = kSingularFloor * out.spectrum.front();
  int nonzero = 0;
  for (double sv : out.spectrum)
    if (sv > floor) ++nonzero;

  int rank = nonzero;
  if (energy_threshold < 1.0) {
    double total = 0.0;
    for (int c = 0; c < nonzero; ++c) total += out.spectrum[static_cast<std::size_t>(c)] * out.spectrum[static_cast<std::size_t>(c)];
    double cum = 0.0;
    for (int c = 0; c < nonzero; ++c) {
      cum += out.spectrum[static_cast<std::size_t>(c)] * out.spectrum[static_cast<std::size_t>(c)];
      if (cum >= energy_threshold * total) {
        rank = c + 1;
        break;
      }
    }
  }
  out.rank = rank;

  Matrix u(rows, rank);
  for (int c = 0; c < rank; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    if (transpose) {
      u.col(c) = v.col(src);
    } else {
      u.col(c) = x.col(src) / norms[static_cast<std::size_t>(src)];
    }
  }
  orthonormalize(u);
  canonicalize_signs(u);
  out.u.values = std::move(u);
  return out;
}

}  // namespace grom
