#ifndef LSAMGDD_DENSE_HPP
#define LSAMGDD_DENSE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lsamgdd/errors.hpp"

namespace lsamgdd {

using Vector = std::vector<double>;

/** \brief Row-major dense matrix.
 *
 * Used for subdomain blocks, local eigenproblems, and test oracles.
 * All storage is 64-bit floating point.
 */
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t n_rows, std::size_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), values_(n_rows * n_cols, 0.0) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_cols_ + j]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> values_;
};

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.n_cols(), a.n_rows());
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t j = 0; j < a.n_cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.n_cols() != b.n_rows())
    throw DimError("matmul: inner dimensions " + std::to_string(a.n_cols()) + " and " +
                   std::to_string(b.n_rows()) + " do not match");
  DenseMatrix c(a.n_rows(), b.n_cols());
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t k = 0; k < a.n_cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.n_cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// aᵀ·b without forming the transpose.
inline DenseMatrix matmul_transa(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.n_rows() != b.n_rows())
    throw DimError("matmul_transa: row counts " + std::to_string(a.n_rows()) + " and " +
                   std::to_string(b.n_rows()) + " do not match");
  DenseMatrix c(a.n_cols(), b.n_cols());
  for (std::size_t k = 0; k < a.n_rows(); ++k)
    for (std::size_t i = 0; i < a.n_cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.n_cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
  if (x.size() != a.n_cols())
    throw DimError("matvec: vector length " + std::to_string(x.size()) +
                   " does not match column count " + std::to_string(a.n_cols()));
  Vector y(a.n_rows(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.n_cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

/// Replace a by (a + aᵀ)/2. Requires a square.
inline void symmetrize(DenseMatrix& a) {
  if (a.n_rows() != a.n_cols()) throw DimError("symmetrize: matrix is not square");
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t j = i + 1; j < a.n_cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
}

/** \brief Dense Cholesky factorization A = L·Lᵀ for symmetric positive
 *  definite blocks.
 *
 * `factor` returns false on breakdown (non-positive pivot) so callers can
 * regularize and retry.
 */
class CholeskyFactor {
public:
  bool factor(const DenseMatrix& a) {
    if (a.n_rows() != a.n_cols()) throw DimError("cholesky: matrix is not square");
    const std::size_t n = a.n_rows();
    l_ = a;
    for (std::size_t j = 0; j < n; ++j) {
      double d = l_(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (!(d > 0.0)) return false;
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = l_(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / ljj;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) l_(i, j) = 0.0;
    return true;
  }

  std::size_t size() const { return l_.n_rows(); }
  bool empty() const { return l_.n_rows() == 0; }

  void solve_inplace(Vector& x) const {
    const std::size_t n = l_.n_rows();
    if (x.size() != n) throw DimError("cholesky solve: vector length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * x[k];
      x[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
      x[ii] = s / l_(ii, ii);
    }
  }

  Vector solve(const Vector& b) const {
    Vector x = b;
    solve_inplace(x);
    return x;
  }

private:
  DenseMatrix l_;
};

/** \brief Factor a symmetric positive definite block, retrying once with a
 *  diagonal shift of 1e-12 times the largest diagonal entry on breakdown.
 *
 * Throws SetupError (with `context` in the message) if the retry also fails.
 */
inline CholeskyFactor factor_spd_block(const DenseMatrix& a, const std::string& context) {
  CholeskyFactor f;
  if (f.factor(a)) return f;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < a.n_rows(); ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  DenseMatrix shifted = a;
  const double jitter = 1e-12 * max_diag;
  for (std::size_t i = 0; i < a.n_rows(); ++i) shifted(i, i) += jitter;
  if (f.factor(shifted)) return f;
  throw SetupError("dense symmetric factorization failed for " + context);
}

} // namespace lsamgdd

#endif // LSAMGDD_DENSE_HPP
