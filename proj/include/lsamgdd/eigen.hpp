#ifndef LSAMGDD_EIGEN_HPP
#define LSAMGDD_EIGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "lsamgdd/dense.hpp"
#include "lsamgdd/errors.hpp"

namespace lsamgdd {

/** \brief Eigenvalues with paired eigenvectors (column k goes with value k).
 *
 * sym_eig returns values ascending; spsd_gevp returns values descending with
 * infinite generalized eigenvalues (right-hand side null directions with
 * nonzero left-hand energy) first. `discarded` counts joint-null directions
 * dropped by spsd_gevp.
 */
struct EigenPairs {
  std::vector<double> values;
  DenseMatrix vectors;
  std::size_t discarded = 0;
};

/** \brief Full eigendecomposition of a symmetric matrix by cyclic Jacobi
 *  rotations.
 *
 * The input is symmetrized internally. Values are ascending and the vector
 * columns are orthonormal to near machine precision.
 */
inline EigenPairs sym_eig(const DenseMatrix& m) {
  if (m.n_rows() != m.n_cols()) throw DimError("sym_eig: matrix is not square");
  const std::size_t n = m.n_rows();
  EigenPairs out;
  out.vectors = DenseMatrix::identity(n);
  out.values.resize(n);
  if (n == 0) return out;

  DenseMatrix a = m;
  symmetrize(a);
  DenseMatrix& v = out.vectors;
  std::vector<double> d(n), b(n), z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] = a(i, i);

  const std::size_t max_sweeps = 64;
  bool converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double sm = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) sm += std::abs(a(p, q));
    if (sm == 0.0) {
      converged = true;
      break;
    }
    const double tresh = sweep < 3 ? 0.2 * sm / (n * n) : 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = 100.0 * std::abs(a(p, q));
        if (sweep > 3 && std::abs(d[p]) + g == std::abs(d[p]) &&
            std::abs(d[q]) + g == std::abs(d[q])) {
          a(p, q) = 0.0;
        } else if (std::abs(a(p, q)) > tresh) {
          double h = d[q] - d[p];
          double t;
          if (std::abs(h) + g == std::abs(h)) {
            t = a(p, q) / h;
          } else {
            const double theta = 0.5 * h / a(p, q);
            t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          const double tau = s / (1.0 + c);
          h = t * a(p, q);
          z[p] -= h;
          z[q] += h;
          d[p] -= h;
          d[q] += h;
          a(p, q) = 0.0;
          auto rotate = [&](double& x, double& y) {
            const double gx = x, hy = y;
            x = gx - s * (hy + gx * tau);
            y = hy + s * (gx - hy * tau);
          };
          for (std::size_t j = 0; j < p; ++j) rotate(a(j, p), a(j, q));
          for (std::size_t j = p + 1; j < q; ++j) rotate(a(p, j), a(j, q));
          for (std::size_t j = q + 1; j < n; ++j) rotate(a(p, j), a(q, j));
          for (std::size_t j = 0; j < n; ++j) rotate(v(j, p), v(j, q));
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      b[i] += z[i];
      d[i] = b[i];
      z[i] = 0.0;
    }
  }
  if (!converged) throw EigError("sym_eig: Jacobi iteration did not converge");
  for (double x : d)
    if (!std::isfinite(x)) throw EigError("sym_eig: non-finite eigenvalue");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
  DenseMatrix sorted(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted(i, k) = v(i, order[k]);
  }
  out.vectors = std::move(sorted);
  return out;
}

namespace detail {

/// Columns [first, first+count) of m.
inline DenseMatrix dense_columns(const DenseMatrix& m, std::size_t first, std::size_t count) {
  DenseMatrix out(m.n_rows(), count);
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = 0; k < count; ++k) out(i, k) = m(i, first + k);
  return out;
}

} // namespace detail

/** \brief Generalized eigenproblem l·u = λ·b·u for a symmetric positive
 *  semidefinite pencil.
 *
 * The right-hand side b is reduced spectrally: directions with b-eigenvalue
 * at most tau_rel times the largest are treated as null. Null directions
 * with left-hand energy become infinite eigenvalues (listed first); joint
 * null directions are discarded and counted. Finite pairs satisfy the
 * pencil equation projected onto the retained subspace of b, and their
 * vectors are b-orthonormal there. Values are sorted descending.
 */
inline EigenPairs spsd_gevp(const DenseMatrix& l, const DenseMatrix& b, double tau_rel = 1e-10) {
  if (l.n_rows() != l.n_cols() || b.n_rows() != b.n_cols() || l.n_rows() != b.n_rows())
    throw DimError("spsd_gevp: pencil matrices must be square and of equal size");
  const std::size_t n = l.n_rows();
  EigenPairs out;
  out.vectors = DenseMatrix(n, 0);
  if (n == 0) return out;

  DenseMatrix ls = l, bs = b;
  symmetrize(ls);
  symmetrize(bs);
  const EigenPairs eb = sym_eig(bs);
  const double mu_max = std::max(eb.values.back(), 0.0);
  const double cut = tau_rel * mu_max;
  std::size_t n_null = 0;
  while (n_null < n && eb.values[n_null] <= cut) ++n_null;
  const std::size_t n_ret = n - n_null;

  const double l_scale = frobenius_norm(ls);
  std::vector<double> values;
  std::vector<Vector> vectors;

  // Null directions of b, split into infinite modes and joint-null discards
  // by their left-hand energy.
  if (n_null > 0) {
    const DenseMatrix vn = detail::dense_columns(eb.vectors, 0, n_null);
    DenseMatrix t = matmul_transa(vn, matmul(ls, vn));
    symmetrize(t);
    const EigenPairs et = sym_eig(t);
    for (std::size_t k = et.values.size(); k-- > 0;) { // descending energy
      if (et.values[k] > tau_rel * l_scale) {
        Vector u(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n_null; ++j) u[i] += vn(i, j) * et.vectors(j, k);
        values.push_back(std::numeric_limits<double>::infinity());
        vectors.push_back(std::move(u));
      } else {
        ++out.discarded;
      }
    }
  }

  // Finite part on the retained subspace: with w = v_r·diag(mu^{-1/2}) the
  // projected pencil becomes the standard problem (wᵀ·l·w)·y = λ·y.
  if (n_ret > 0) {
    DenseMatrix w = detail::dense_columns(eb.vectors, n_null, n_ret);
    for (std::size_t j = 0; j < n_ret; ++j) {
      const double scale = 1.0 / std::sqrt(eb.values[n_null + j]);
      for (std::size_t i = 0; i < n; ++i) w(i, j) *= scale;
    }
    DenseMatrix c = matmul_transa(w, matmul(ls, w));
    symmetrize(c);
    const EigenPairs ec = sym_eig(c);
    for (std::size_t k = ec.values.size(); k-- > 0;) { // descending
      Vector u(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n_ret; ++j) u[i] += w(i, j) * ec.vectors(j, k);
      values.push_back(ec.values[k]);
      vectors.push_back(std::move(u));
    }
  }

  out.values = std::move(values);
  out.vectors = DenseMatrix(n, out.values.size());
  for (std::size_t k = 0; k < out.values.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = vectors[k][i];
  return out;
}

/** \brief Spectral pseudoinverse of a symmetric positive semidefinite
 *  matrix; eigenvalues at most tau_rel times the largest are inverted to
 *  zero.
 */
inline DenseMatrix pseudo_inverse(const DenseMatrix& m, double tau_rel = 1e-10) {
  if (m.n_rows() != m.n_cols()) throw DimError("pseudo_inverse: matrix is not square");
  const std::size_t n = m.n_rows();
  const EigenPairs e = sym_eig(m);
  const double cut = n == 0 ? 0.0 : tau_rel * std::max(e.values.back(), 0.0);
  DenseMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (e.values[k] <= cut) continue;
    const double inv = 1.0 / e.values[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = e.vectors(i, k) * inv;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * e.vectors(j, k);
    }
  }
  return out;
}

} // namespace lsamgdd

#endif // LSAMGDD_EIGEN_HPP
