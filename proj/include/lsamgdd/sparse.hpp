#ifndef LSAMGDD_SPARSE_HPP
#define LSAMGDD_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lsamgdd/dense.hpp"
#include "lsamgdd/errors.hpp"

namespace lsamgdd {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/** \brief Compressed sparse row matrix. The only sparse storage format in the
 *  toolkit.
 *
 * Invariants: row offsets are monotone, column indices are strictly
 * increasing within each row and in range, and all values are finite.
 */
class SparseMatrix {
public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    if (row_offsets_.size() != n_rows_ + 1)
      throw DimError("sparse matrix: row offset array has wrong length");
    if (col_indices_.size() != values_.size() || row_offsets_.back() != values_.size())
      throw DimError("sparse matrix: index and value arrays disagree");
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t row_begin(std::size_t i) const { return row_offsets_[i]; }
  std::size_t row_end(std::size_t i) const { return row_offsets_[i + 1]; }
  std::size_t col_index(std::size_t k) const { return col_indices_[k]; }
  double value(std::size_t k) const { return values_[k]; }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> offs(n + 1), cols(n);
    std::vector<double> vals(n, 1.0);
    for (std::size_t i = 0; i <= n; ++i) offs[i] = i;
    for (std::size_t i = 0; i < n; ++i) cols[i] = i;
    return SparseMatrix(n, n, std::move(offs), std::move(cols), std::move(vals));
  }

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_ = {0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/** \brief Build a CSR matrix from unordered triplets.
 *
 * Duplicate entries are summed; entries whose summed value is exactly zero
 * are dropped. Out-of-range indices raise IndexError.
 */
inline SparseMatrix csr_from_triplets(std::size_t n_rows, std::size_t n_cols,
                                      std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    if (t.row >= n_rows || t.col >= n_cols)
      throw IndexError("csr_from_triplets: entry (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                       std::to_string(n_cols));
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offs(n_rows + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    while (k < triplets.size() && triplets[k].row == i) {
      const std::size_t c = triplets[k].col;
      double s = 0.0;
      while (k < triplets.size() && triplets[k].row == i && triplets[k].col == c)
        s += triplets[k++].value;
      if (s != 0.0) {
        cols.push_back(c);
        vals.push_back(s);
      }
    }
    offs[i + 1] = cols.size();
  }
  return SparseMatrix(n_rows, n_cols, std::move(offs), std::move(cols), std::move(vals));
}

inline Vector spmv(const SparseMatrix& m, const Vector& x) {
  if (x.size() != m.n_cols())
    throw DimError("spmv: vector length " + std::to_string(x.size()) +
                   " does not match column count " + std::to_string(m.n_cols()));
  Vector y(m.n_rows(), 0.0);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k)
      s += m.value(k) * x[m.col_index(k)];
    y[i] = s;
  }
  return y;
}

/// mᵀ·x without forming the transpose.
inline Vector spmv_transpose(const SparseMatrix& m, const Vector& x) {
  if (x.size() != m.n_rows())
    throw DimError("spmv_transpose: vector length " + std::to_string(x.size()) +
                   " does not match row count " + std::to_string(m.n_rows()));
  Vector y(m.n_cols(), 0.0);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k)
      y[m.col_index(k)] += m.value(k) * xi;
  }
  return y;
}

inline SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<std::size_t> offs(m.n_cols() + 1, 0);
  for (std::size_t k = 0; k < m.nnz(); ++k) ++offs[m.col_index(k) + 1];
  for (std::size_t j = 0; j < m.n_cols(); ++j) offs[j + 1] += offs[j];
  std::vector<std::size_t> cols(m.nnz());
  std::vector<double> vals(m.nnz());
  std::vector<std::size_t> cursor(offs.begin(), offs.end() - 1);
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k) {
      const std::size_t p = cursor[m.col_index(k)]++;
      cols[p] = i;
      vals[p] = m.value(k);
    }
  return SparseMatrix(m.n_cols(), m.n_rows(), std::move(offs), std::move(cols), std::move(vals));
}

enum class SpgemmMode {
  Numeric,  ///< drop result entries that are exactly zero
  Symbolic  ///< keep the full structural product pattern, including exact zeros
};

/** \brief Sparse matrix product a·b.
 *
 * In Symbolic mode the result pattern is the structural product: entries
 * whose values cancel to exact zero are retained. Overlap and row-set logic
 * downstream depends on that pattern, so every product feeding the solver
 * pipeline uses Symbolic mode.
 */
inline SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b,
                           SpgemmMode mode = SpgemmMode::Numeric) {
  if (a.n_cols() != b.n_rows())
    throw DimError("spgemm: inner dimensions " + std::to_string(a.n_cols()) + " and " +
                   std::to_string(b.n_rows()) + " do not match");
  const std::size_t n_rows = a.n_rows(), n_cols = b.n_cols();
  std::vector<double> acc(n_cols, 0.0);
  std::vector<bool> seen(n_cols, false);
  std::vector<std::size_t> touched;
  std::vector<std::size_t> offs(n_rows + 1, 0), cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n_rows; ++i) {
    touched.clear();
    for (std::size_t ka = a.row_begin(i); ka < a.row_end(i); ++ka) {
      const std::size_t kk = a.col_index(ka);
      const double av = a.value(ka);
      for (std::size_t kb = b.row_begin(kk); kb < b.row_end(kk); ++kb) {
        const std::size_t j = b.col_index(kb);
        if (!seen[j]) {
          seen[j] = true;
          touched.push_back(j);
        }
        acc[j] += av * b.value(kb);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t j : touched) {
      if (mode == SpgemmMode::Symbolic || acc[j] != 0.0) {
        cols.push_back(j);
        vals.push_back(acc[j]);
      }
      acc[j] = 0.0;
      seen[j] = false;
    }
    offs[i + 1] = cols.size();
  }
  return SparseMatrix(n_rows, n_cols, std::move(offs), std::move(cols), std::move(vals));
}

/** \brief Extract m(rows, cols) as a dense block, in the given index orders.
 *
 * Index lists must be duplicate-free and in range (IndexError otherwise).
 */
inline DenseMatrix submatrix(const SparseMatrix& m, const std::vector<std::size_t>& rows,
                             const std::vector<std::size_t>& cols) {
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  for (std::size_t r : rows)
    if (r >= m.n_rows()) throw IndexError("submatrix: row index " + std::to_string(r) + " out of range");
  for (std::size_t c : cols)
    if (c >= m.n_cols()) throw IndexError("submatrix: column index " + std::to_string(c) + " out of range");
  std::vector<std::size_t> colmap(m.n_cols(), npos);
  for (std::size_t p = 0; p < cols.size(); ++p) {
    if (colmap[cols[p]] != npos) throw IndexError("submatrix: duplicate column index");
    colmap[cols[p]] = p;
  }
  std::vector<bool> rowseen(m.n_rows(), false);
  for (std::size_t r : rows) {
    if (rowseen[r]) throw IndexError("submatrix: duplicate row index");
    rowseen[r] = true;
  }
  DenseMatrix out(rows.size(), cols.size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    const std::size_t r = rows[p];
    for (std::size_t k = m.row_begin(r); k < m.row_end(r); ++k) {
      const std::size_t q = colmap[m.col_index(k)];
      if (q != npos) out(p, q) = m.value(k);
    }
  }
  return out;
}

/** \brief Sorted list of rows of m with at least one stored entry in the
 *  given column set.
 */
inline std::vector<std::size_t> rows_nonzero_in_columns(const SparseMatrix& m,
                                                        const std::vector<std::size_t>& cols) {
  std::vector<bool> mark(m.n_cols(), false);
  for (std::size_t c : cols) {
    if (c >= m.n_cols())
      throw IndexError("rows_nonzero_in_columns: column index " + std::to_string(c) + " out of range");
    mark[c] = true;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k)
      if (mark[m.col_index(k)]) {
        rows.push_back(i);
        break;
      }
  return rows;
}

inline DenseMatrix to_dense(const SparseMatrix& m) {
  DenseMatrix d(m.n_rows(), m.n_cols());
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k) d(i, m.col_index(k)) = m.value(k);
  return d;
}

inline double frobenius_norm(const SparseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

/// Frobenius norm of a − b, merging the two patterns row by row.
inline double frobenius_diff(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
    throw DimError("frobenius_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    std::size_t ka = a.row_begin(i), kb = b.row_begin(i);
    const std::size_t ea = a.row_end(i), eb = b.row_end(i);
    while (ka < ea || kb < eb) {
      double d;
      if (kb >= eb || (ka < ea && a.col_index(ka) < b.col_index(kb)))
        d = a.value(ka++);
      else if (ka >= ea || b.col_index(kb) < a.col_index(ka))
        d = -b.value(kb++);
      else {
        d = a.value(ka++) - b.value(kb++);
      }
      s += d * d;
    }
  }
  return std::sqrt(s);
}

// Small vector helpers shared across the toolkit.

inline double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

/// y += alpha·x
inline void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw DimError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace lsamgdd

#endif // LSAMGDD_SPARSE_HPP
