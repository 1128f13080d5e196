#ifndef LSAMGDD_HIERARCHY_HPP
#define LSAMGDD_HIERARCHY_HPP

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "lsamgdd/aggregation.hpp"
#include "lsamgdd/dense.hpp"
#include "lsamgdd/errors.hpp"
#include "lsamgdd/smoother.hpp"
#include "lsamgdd/sparse.hpp"
#include "lsamgdd/splitting.hpp"

namespace lsamgdd {

/** \brief Setup parameters of the multilevel hierarchy. */
struct LevelParams {
  std::size_t max_levels = 25;    ///< hard cap on the number of levels (at least 2)
  std::size_t coarse_size = 400;  ///< stop coarsening at or below this dimension
  std::size_t aggregation_passes = 1;
  double kappa = 50.0;            ///< target condition number driving the threshold
  double must_keep = 5.0;         ///< retain modes at or above this value past the cap
  std::vector<std::size_t> coarsening_ratios = {2, 3}; ///< per-level caps; last repeats
  std::size_t pre_sweeps = 1;
  std::size_t post_sweeps = 1;
  GevpVariant gevp_variant = GevpVariant::SchurReduced;
  std::string spectra_csv; ///< when set, dump per-aggregate eigenvalues here
};

struct LevelSummary {
  std::size_t level = 0;
  std::size_t dim = 0;
  std::size_t nnz = 0;
  std::size_t n_aggregates = 0;
  std::size_t k_c = 0;
  std::size_t n_mult = 0;
  double thresh = 0.0;
  std::size_t modes_kept = 0;
};

/** \brief One level: its system pair, and (except on the coarsest) the
 *  aggregate topology, smoother, and interpolation to the next level.
 */
struct Level {
  SparseMatrix A;
  SparseMatrix G;
  SparseMatrix P;
  bool has_interpolation = false;
  AggregateTopology topology;
  SchwarzSmoother smoother;
  double thresh = 0.0;
};

/** \brief Immutable multilevel hierarchy; safe to share across concurrent
 *  solves.
 */
struct Hierarchy {
  std::vector<Level> levels;
  CholeskyFactor coarse_factor;
  LevelParams params;
  std::vector<LevelSummary> summary;
};

/** \brief Assemble the block-diagonal interpolation operator from the
 *  per-aggregate basis panels.
 *
 * Rows of column group i live only in omega[i]; columns keep the panel
 * order (leading modes first).
 */
inline SparseMatrix assemble_P(const AggregateTopology& topo,
                               const std::vector<DenseMatrix>& panels) {
  const std::size_t n_agg = topo.n_aggregates();
  if (panels.size() != n_agg)
    throw DimError("assemble_P: expected one panel per aggregate");
  std::size_t n_coarse = 0;
  for (std::size_t i = 0; i < n_agg; ++i) {
    if (panels[i].n_cols() == 0)
      throw SetupError("assemble_P: aggregate " + std::to_string(i) + " has an empty panel");
    if (panels[i].n_rows() != topo.omega[i].size())
      throw DimError("assemble_P: panel of aggregate " + std::to_string(i) +
                     " does not match its interior size");
    n_coarse += panels[i].n_cols();
  }
  std::vector<Triplet> trips;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n_agg; ++i) {
    for (std::size_t r = 0; r < panels[i].n_rows(); ++r)
      for (std::size_t c = 0; c < panels[i].n_cols(); ++c)
        trips.push_back({topo.omega[i][r], offset + c, panels[i](r, c)});
    offset += panels[i].n_cols();
  }
  return csr_from_triplets(topo.n_nodes, n_coarse, std::move(trips));
}

/** \brief Build the multilevel hierarchy from a factor.
 *
 * Each level aggregates its structural graph, colors the subdomains, builds
 * the Schwarz smoother, solves the per-aggregate eigenproblems at the
 * level's threshold, and propagates the factor through the interpolation:
 * the next factor is G·P, so the next matrix is its own normal matrix.
 * Coarsening continues until the dimension cap or the level cap; the
 * coarsest matrix is factorized densely.
 */
inline Hierarchy setup(const SparseMatrix& g0, const LevelParams& params) {
  if (params.max_levels < 2) throw InputError("setup: max_levels must be at least 2");
  if (params.coarse_size < 1) throw InputError("setup: coarse_size must be positive");
  if (params.aggregation_passes < 1)
    throw InputError("setup: aggregation_passes must be positive");
  if (!(params.kappa > 1.0)) throw InputError("setup: kappa must exceed 1");
  if (!(params.must_keep > 1.0)) throw InputError("setup: must_keep must exceed 1");
  if (params.coarsening_ratios.empty())
    throw InputError("setup: coarsening_ratios must not be empty");
  for (std::size_t c : params.coarsening_ratios)
    if (c < 2) throw InputError("setup: coarsening ratios must be at least 2");
  if (g0.n_rows() == 0 || g0.n_cols() == 0) throw InputError("setup: factor is empty");

  Hierarchy h;
  h.params = params;
  std::ofstream spectra;
  if (!params.spectra_csv.empty()) {
    spectra.open(params.spectra_csv);
    if (!spectra) throw SetupError("setup: cannot open " + params.spectra_csv);
    spectra.precision(17);
    spectra << "level,aggregate,index,eigenvalue\n";
  }

  Level level;
  level.G = g0;
  level.A = spgemm(transpose(g0), g0, SpgemmMode::Symbolic);
  h.levels.push_back(std::move(level));

  while (h.levels.size() < params.max_levels &&
         h.levels.back().A.n_rows() > params.coarse_size) {
    const std::size_t ell = h.levels.size() - 1;
    Level& cur = h.levels.back();
    const Partition part = multi_pass_aggregation(cur.A, params.aggregation_passes);
    cur.topology = build_topology(cur.A, part);
    cur.smoother = build_smoother(cur.A, cur.topology, SchwarzMode::RAS);
    const RowSets rs = compute_row_sets(cur.G, cur.topology);
    cur.thresh = eigen_threshold(params.kappa, cur.topology.n_colors, cur.topology.multiplicity_max);
    const std::size_t ratio =
        params.coarsening_ratios[std::min(ell, params.coarsening_ratios.size() - 1)];

    std::vector<DenseMatrix> panels(cur.topology.n_aggregates());
    std::vector<double> eigs;
    for (std::size_t i = 0; i < cur.topology.n_aggregates(); ++i) {
      const LocalBlocks blocks = assemble_local(i, cur.G, cur.topology, rs);
      // The finest level keeps every mode above the threshold: a candidate
      // deferred here is invisible to all coarser levels, and finest-level
      // panels are thin enough that the extra columns are nearly free.
      // Coarser levels apply the ratio cap, except that a mode at or above
      // must_keep is retained even once the cap is spent: the smoother
      // cannot absorb it at any price.
      std::size_t cap = cur.topology.omega[i].size();
      if (ell > 0) {
        cap = cur.topology.omega[i].size() / ratio;
        if (cap == 0) cap = 1;
      }
      panels[i] = local_gevp(i, blocks, cur.thresh, cap, params.gevp_variant,
                             spectra.is_open() ? &eigs : nullptr, params.must_keep);
      if (spectra.is_open())
        for (std::size_t k = 0; k < eigs.size(); ++k)
          spectra << ell << "," << i << "," << k << "," << eigs[k] << "\n";
    }
    cur.P = assemble_P(cur.topology, panels);
    cur.has_interpolation = true;

    Level next;
    next.G = spgemm(cur.G, cur.P, SpgemmMode::Symbolic);
    next.A = spgemm(transpose(next.G), next.G, SpgemmMode::Symbolic);
    if (next.A.n_rows() >= cur.A.n_rows())
      throw SetupError("setup: stagnant coarsening at level " + std::to_string(ell) + " (" +
                       std::to_string(cur.A.n_rows()) + " -> " + std::to_string(next.A.n_rows()) +
                       ")");

    LevelSummary row;
    row.level = ell;
    row.dim = cur.A.n_rows();
    row.nnz = cur.A.nnz();
    row.n_aggregates = cur.topology.n_aggregates();
    row.k_c = cur.topology.n_colors;
    row.n_mult = cur.topology.multiplicity_max;
    row.thresh = cur.thresh;
    row.modes_kept = cur.P.n_cols();
    h.summary.push_back(row);

    h.levels.push_back(std::move(next));
  }

  const Level& coarse = h.levels.back();
  h.coarse_factor = factor_spd_block(to_dense(coarse.A), "coarsest-level matrix");
  LevelSummary last;
  last.level = h.levels.size() - 1;
  last.dim = coarse.A.n_rows();
  last.nnz = coarse.A.nnz();
  h.summary.push_back(last);
  return h;
}

/** \brief One multilevel cycle on the given level: smoother pass, coarse
 *  correction through the interpolation, adjoint smoother pass.
 */
inline Vector vcycle(const Hierarchy& h, std::size_t level, const Vector& r) {
  if (level >= h.levels.size()) throw IndexError("vcycle: level out of range");
  const Level& cur = h.levels[level];
  if (r.size() != cur.A.n_rows()) throw DimError("vcycle: residual length mismatch");
  if (level + 1 == h.levels.size()) return h.coarse_factor.solve(r);

  Vector e(r.size(), 0.0);
  for (std::size_t sweep = 0; sweep < h.params.pre_sweeps; ++sweep) {
    Vector res = r;
    axpy(-1.0, spmv(cur.A, e), res);
    axpy(1.0, apply(cur.smoother, res, SchwarzMode::RAS), e);
  }
  Vector res = r;
  axpy(-1.0, spmv(cur.A, e), res);
  const Vector coarse = vcycle(h, level + 1, spmv_transpose(cur.P, res));
  axpy(1.0, spmv(cur.P, coarse), e);
  for (std::size_t sweep = 0; sweep < h.params.post_sweeps; ++sweep) {
    Vector res2 = r;
    axpy(-1.0, spmv(cur.A, e), res2);
    axpy(1.0, apply(cur.smoother, res2, SchwarzMode::RAST), e);
  }
  return e;
}

inline Vector vcycle(const Hierarchy& h, const Vector& r) { return vcycle(h, 0, r); }

/** \brief Additive two-level operator: exact first-coarse-level correction
 *  plus the fully overlapping Schwarz smoother, for spectrum studies.
 */
class TwoLevelAdditive {
public:
  explicit TwoLevelAdditive(const Hierarchy& h) : h_(h) {
    if (h.levels.size() < 2)
      throw InputError("TwoLevelAdditive: hierarchy has fewer than two levels");
    coarse_ = factor_spd_block(to_dense(h.levels[1].A), "first coarse-level matrix");
  }

  Vector apply_to(const Vector& r) const {
    const Level& fine = h_.levels.front();
    Vector coarse = spmv_transpose(fine.P, r);
    coarse_.solve_inplace(coarse);
    Vector y = spmv(fine.P, coarse);
    axpy(1.0, apply(fine.smoother, r, SchwarzMode::ASM), y);
    return y;
  }

private:
  const Hierarchy& h_;
  CholeskyFactor coarse_;
};

/// Sum of stored entries of all level matrices over the finest level's.
inline double operator_complexity(const Hierarchy& h) {
  double total = 0.0;
  for (const Level& level : h.levels) total += static_cast<double>(level.A.nnz());
  return total / static_cast<double>(h.levels.front().A.nnz());
}

} // namespace lsamgdd

#endif // LSAMGDD_HIERARCHY_HPP
