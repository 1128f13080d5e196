#ifndef LSAMGDD_SPLITTING_HPP
#define LSAMGDD_SPLITTING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "lsamgdd/aggregation.hpp"
#include "lsamgdd/dense.hpp"
#include "lsamgdd/eigen.hpp"
#include "lsamgdd/errors.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

/** \brief Per-aggregate row sets of the factor G.
 *
 * nz[i] lists the rows of G with a stored entry in aggregate i's interior
 * columns. multiplicity[j] counts how many row sets contain row j; n_mult
 * is its maximum over covered rows.
 */
struct RowSets {
  std::vector<std::vector<std::size_t>> nz;
  std::vector<std::size_t> multiplicity;
  std::size_t n_mult = 0;
};

/** \brief Dense local pieces of the factor for one aggregate: the interior
 *  and boundary column blocks of the nz rows, and the per-row weights
 *  1/multiplicity.
 */
struct LocalBlocks {
  DenseMatrix g_omega;
  DenseMatrix g_gamma;
  Vector weights;
};

/// Which left-hand side the local eigenproblem uses. SchurReduced is the
/// production choice; WeightedLhs is a study variant that weights the
/// left-hand Gram matrix too.
enum class GevpVariant { SchurReduced, WeightedLhs };

/** \brief Compute all row sets of g for the given topology and record the
 *  multiplicity bound into it.
 *
 * Rows of g with no stored entries belong to no set; they are counted and
 * logged but allowed.
 */
inline RowSets compute_row_sets(const SparseMatrix& g, AggregateTopology& topo) {
  const std::size_t n_agg = topo.n_aggregates();
  if (g.n_cols() != topo.n_nodes)
    throw DimError("compute_row_sets: factor has " + std::to_string(g.n_cols()) +
                   " columns, topology covers " + std::to_string(topo.n_nodes) + " nodes");
  std::vector<std::size_t> owner(topo.n_nodes);
  for (std::size_t i = 0; i < n_agg; ++i)
    for (std::size_t u : topo.omega[i]) owner[u] = i;

  RowSets rs;
  rs.nz.resize(n_agg);
  rs.multiplicity.assign(g.n_rows(), 0);
  std::vector<std::size_t> hit;
  std::size_t empty_rows = 0;
  for (std::size_t j = 0; j < g.n_rows(); ++j) {
    hit.clear();
    for (std::size_t k = g.row_begin(j); k < g.row_end(j); ++k) hit.push_back(owner[g.col_index(k)]);
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    if (hit.empty()) {
      ++empty_rows;
      continue;
    }
    for (std::size_t i : hit) rs.nz[i].push_back(j);
    rs.multiplicity[j] = hit.size();
    rs.n_mult = std::max(rs.n_mult, hit.size());
  }
  if (empty_rows > 0)
    std::cerr << "lsamgdd: note: " << empty_rows << " empty factor row(s) belong to no row set\n";
  topo.multiplicity_max = rs.n_mult;
  return rs;
}

/** \brief Extract the dense local blocks of aggregate i. */
inline LocalBlocks assemble_local(std::size_t i, const SparseMatrix& g,
                                  const AggregateTopology& topo, const RowSets& rs) {
  if (i >= topo.n_aggregates()) throw IndexError("assemble_local: aggregate id out of range");
  LocalBlocks blocks;
  blocks.g_omega = submatrix(g, rs.nz[i], topo.omega[i]);
  blocks.g_gamma = submatrix(g, rs.nz[i], topo.gamma[i]);
  blocks.weights.resize(rs.nz[i].size());
  for (std::size_t r = 0; r < rs.nz[i].size(); ++r)
    blocks.weights[r] = 1.0 / static_cast<double>(rs.multiplicity[rs.nz[i][r]]);
  return blocks;
}

namespace detail {

/// xᵀ·diag(w)·y for dense blocks with a common row space.
inline DenseMatrix weighted_gram(const DenseMatrix& x, const DenseMatrix& y, const Vector& w) {
  if (x.n_rows() != y.n_rows() || x.n_rows() != w.size())
    throw DimError("weighted_gram: row dimensions disagree");
  DenseMatrix out(x.n_cols(), y.n_cols());
  for (std::size_t r = 0; r < x.n_rows(); ++r) {
    const double wr = w[r];
    for (std::size_t i = 0; i < x.n_cols(); ++i) {
      const double xi = wr * x(r, i);
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < y.n_cols(); ++j) out(i, j) += xi * y(r, j);
    }
  }
  return out;
}

} // namespace detail

/** \brief The weighted local matrix of aggregate i on its subdomain
 *  ordering: [g_omega g_gamma]ᵀ·diag(w)·[g_omega g_gamma].
 */
inline DenseMatrix local_splitting_matrix(const LocalBlocks& blocks) {
  const std::size_t nw = blocks.g_omega.n_cols(), ng = blocks.g_gamma.n_cols();
  DenseMatrix out(nw + ng, nw + ng);
  const DenseMatrix ww = detail::weighted_gram(blocks.g_omega, blocks.g_omega, blocks.weights);
  const DenseMatrix wg = detail::weighted_gram(blocks.g_omega, blocks.g_gamma, blocks.weights);
  const DenseMatrix gg = detail::weighted_gram(blocks.g_gamma, blocks.g_gamma, blocks.weights);
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; j < nw; ++j) out(i, j) = ww(i, j);
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; j < ng; ++j) {
      out(i, nw + j) = wg(i, j);
      out(nw + j, i) = wg(i, j);
    }
  for (std::size_t i = 0; i < ng; ++i)
    for (std::size_t j = 0; j < ng; ++j) out(nw + i, nw + j) = gg(i, j);
  return out;
}

/** \brief Reassemble the sum of the weighted local matrices and return its
 *  relative Frobenius distance to a.
 *
 * The sum telescopes back to a exactly; a distance above 1e-12 indicates a
 * broken decomposition and raises SplittingError.
 */
inline double verify_splitting(const SparseMatrix& g, const SparseMatrix& a,
                               const AggregateTopology& topo, const RowSets& rs) {
  const std::size_t n = a.n_rows();
  if (a.n_cols() != n || g.n_cols() != n) throw DimError("verify_splitting: shape mismatch");
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < topo.n_aggregates(); ++i) {
    const LocalBlocks blocks = assemble_local(i, g, topo, rs);
    const DenseMatrix local = local_splitting_matrix(blocks);
    const std::vector<std::size_t> sub = topo.subdomain(i);
    for (std::size_t r = 0; r < sub.size(); ++r)
      for (std::size_t c = 0; c < sub.size(); ++c)
        if (local(r, c) != 0.0) trips.push_back({sub[r], sub[c], local(r, c)});
  }
  const SparseMatrix sum = csr_from_triplets(n, n, std::move(trips));
  const double err = frobenius_diff(sum, a) / frobenius_norm(a);
  if (err > 1e-12)
    throw SplittingError("splitting identity violated: relative error " + std::to_string(err));
  return err;
}

/** \brief Eigenvalue selection threshold max{0.1, (kappa - k_c)/(k_c·n_mult)}.
 *
 * kappa at or below k_c falls back to the floor 0.1 with a warning.
 */
inline double eigen_threshold(double kappa, std::size_t k_c, std::size_t n_mult) {
  if (k_c == 0 || n_mult == 0) throw InputError("eigen_threshold: k_c and n_mult must be positive");
  if (kappa <= static_cast<double>(k_c)) {
    std::cerr << "lsamgdd: warning: target condition number " << kappa
              << " does not exceed the color count " << k_c << "; using the floor threshold\n";
    return 0.1;
  }
  const double t = (kappa - static_cast<double>(k_c)) /
                   (static_cast<double>(k_c) * static_cast<double>(n_mult));
  return std::max(0.1, t);
}

/** \brief Solve the local generalized eigenproblem of aggregate i and
 *  return the selected basis panel (one column per kept mode).
 *
 * The pencil is L·u = λ·S·u with L the unweighted interior Gram matrix and
 * S the weighted interior Gram matrix minus its boundary Schur complement
 * (boundary Gram pseudoinverted at relative cutoff 1e-10). Null modes of S
 * (infinite eigenvalues) are kept unconditionally: the reduced form offers
 * no control over them, so they pass every finite threshold and no budget
 * can justify discarding one. Among the finite modes, those with the
 * LARGEST eigenvalues above thresh are kept, at most max_modes of them,
 * except that modes at or above must_keep are retained past the budget: a
 * single deferred mode at that size already costs more conditioning than
 * the whole selection is budgeted to admit, so deferring it to the smoother
 * is never a saving. At least one mode is always returned. Panel columns
 * are orthonormalized; if everything degenerates the normalized constant
 * vector is returned. The full eigenvalue list can be captured through
 * eigenvalues_out.
 */
inline DenseMatrix local_gevp(std::size_t i, const LocalBlocks& blocks, double thresh,
                              std::size_t max_modes, GevpVariant variant = GevpVariant::SchurReduced,
                              std::vector<double>* eigenvalues_out = nullptr,
                              double must_keep = std::numeric_limits<double>::infinity()) {
  const std::size_t nw = blocks.g_omega.n_cols();
  if (nw == 0) throw InputError("local_gevp: aggregate " + std::to_string(i) + " has no interior");
  if (max_modes == 0) max_modes = 1;
  constexpr double tau_rel = 1e-10;

  const Vector unit_weights(blocks.weights.size(), 1.0);
  DenseMatrix lhs = variant == GevpVariant::WeightedLhs
                        ? detail::weighted_gram(blocks.g_omega, blocks.g_omega, blocks.weights)
                        : detail::weighted_gram(blocks.g_omega, blocks.g_omega, unit_weights);
  DenseMatrix rhs = detail::weighted_gram(blocks.g_omega, blocks.g_omega, blocks.weights);
  if (blocks.g_gamma.n_cols() > 0) {
    const DenseMatrix cross = detail::weighted_gram(blocks.g_omega, blocks.g_gamma, blocks.weights);
    const DenseMatrix boundary = detail::weighted_gram(blocks.g_gamma, blocks.g_gamma, blocks.weights);
    const DenseMatrix schur = matmul(cross, matmul(pseudo_inverse(boundary, tau_rel), transpose(cross)));
    for (std::size_t r = 0; r < nw; ++r)
      for (std::size_t c = 0; c < nw; ++c) rhs(r, c) -= schur(r, c);
  }
  symmetrize(rhs);

  const EigenPairs pairs = spsd_gevp(lhs, rhs, tau_rel);
  if (eigenvalues_out) *eigenvalues_out = pairs.values;
  for (double v : pairs.values)
    if (std::isnan(v)) throw EigError("local_gevp: aggregate " + std::to_string(i) + ": NaN eigenvalue");

  std::size_t n_null = 0;
  while (n_null < pairs.values.size() && std::isinf(pairs.values[n_null])) ++n_null;
  std::size_t above = n_null;
  while (above < pairs.values.size() && pairs.values[above] > thresh) ++above;
  std::size_t severe = n_null;
  while (severe < above && pairs.values[severe] >= must_keep) ++severe;
  std::size_t keep = n_null + std::max(std::min(above - n_null, max_modes), severe - n_null);
  if (keep == 0) keep = 1;
  keep = std::min(keep, pairs.values.size());

  // Orthonormalize the kept columns (modified Gram-Schmidt, two passes);
  // directions that collapse are dropped.
  DenseMatrix panel(nw, keep);
  std::size_t cols = 0;
  for (std::size_t k = 0; k < keep; ++k) {
    Vector v(nw);
    for (std::size_t r = 0; r < nw; ++r) v[r] = pairs.vectors(r, k);
    const double orig = norm2(v);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t c = 0; c < cols; ++c) {
        double proj = 0.0;
        for (std::size_t r = 0; r < nw; ++r) proj += panel(r, c) * v[r];
        for (std::size_t r = 0; r < nw; ++r) v[r] -= proj * panel(r, c);
      }
    const double nv = norm2(v);
    if (!(nv > 1e-12 * std::max(orig, 1e-300))) continue;
    // Deterministic sign: the entry of largest magnitude is positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < nw; ++r)
      if (std::abs(v[r]) > std::abs(v[arg])) arg = r;
    const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < nw; ++r) panel(r, cols) = sign * v[r] / nv;
    ++cols;
  }
  if (cols == 0) {
    panel = DenseMatrix(nw, 1);
    const double unit = 1.0 / std::sqrt(static_cast<double>(nw));
    for (std::size_t r = 0; r < nw; ++r) panel(r, 0) = unit;
    return panel;
  }
  if (cols < keep) {
    DenseMatrix trimmed(nw, cols);
    for (std::size_t r = 0; r < nw; ++r)
      for (std::size_t c = 0; c < cols; ++c) trimmed(r, c) = panel(r, c);
    panel = std::move(trimmed);
  }
  return panel;
}

} // namespace lsamgdd

#endif // LSAMGDD_SPLITTING_HPP
