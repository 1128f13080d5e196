#ifndef LSAMGDD_SMOOTHER_HPP
#define LSAMGDD_SMOOTHER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "lsamgdd/aggregation.hpp"
#include "lsamgdd/dense.hpp"
#include "lsamgdd/errors.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

/** \brief Application mode of the overlapping Schwarz smoother.
 *
 * RAS restricts the overlapping solve back through the Boolean partition of
 * unity; RAST is its adjoint (the partition of unity acts on the residual
 * side); ASM keeps the full overlapping contributions on both sides.
 */
enum class SchwarzMode { RAS, RAST, ASM };

/** \brief Overlapping Schwarz smoother with dense per-subdomain
 *  factorizations.
 *
 * Subdomain i is the aggregate interior followed by its boundary layer;
 * the partition-of-unity prefix length is omega_sizes[i]. One factorization
 * serves all three application modes.
 */
struct SchwarzSmoother {
  std::vector<std::vector<std::size_t>> subdomains;
  std::vector<std::size_t> omega_sizes;
  std::vector<CholeskyFactor> factors;
  SchwarzMode mode = SchwarzMode::RAS;
  std::size_t n = 0;
};

inline SchwarzSmoother build_smoother(const SparseMatrix& a, const AggregateTopology& topo,
                                      SchwarzMode mode = SchwarzMode::RAS) {
  if (a.n_rows() != a.n_cols()) throw DimError("build_smoother: matrix is not square");
  if (a.n_rows() != topo.n_nodes)
    throw DimError("build_smoother: topology covers " + std::to_string(topo.n_nodes) +
                   " nodes, matrix has " + std::to_string(a.n_rows()));
  SchwarzSmoother s;
  s.mode = mode;
  s.n = a.n_rows();
  const std::size_t n_agg = topo.n_aggregates();
  s.subdomains.resize(n_agg);
  s.omega_sizes.resize(n_agg);
  s.factors.resize(n_agg);
  for (std::size_t i = 0; i < n_agg; ++i) {
    s.subdomains[i] = topo.subdomain(i);
    s.omega_sizes[i] = topo.omega[i].size();
    const DenseMatrix block = submatrix(a, s.subdomains[i], s.subdomains[i]);
    s.factors[i] = factor_spd_block(block, "subdomain block of aggregate " + std::to_string(i));
  }
  return s;
}

/** \brief Apply the smoother to a residual in the given mode.
 *
 * Subdomains are processed in a fixed ascending order, so the accumulation
 * is deterministic.
 */
inline Vector apply(const SchwarzSmoother& s, const Vector& r, SchwarzMode mode) {
  if (r.size() != s.n)
    throw DimError("schwarz apply: vector length " + std::to_string(r.size()) +
                   " does not match system size " + std::to_string(s.n));
  Vector y(s.n, 0.0);
  Vector local;
  for (std::size_t i = 0; i < s.subdomains.size(); ++i) {
    const std::vector<std::size_t>& sub = s.subdomains[i];
    const std::size_t interior = s.omega_sizes[i];
    local.resize(sub.size());
    for (std::size_t k = 0; k < sub.size(); ++k) local[k] = r[sub[k]];
    if (mode == SchwarzMode::RAST)
      for (std::size_t k = interior; k < sub.size(); ++k) local[k] = 0.0;
    s.factors[i].solve_inplace(local);
    const std::size_t scatter = mode == SchwarzMode::RAS ? interior : sub.size();
    for (std::size_t k = 0; k < scatter; ++k) y[sub[k]] += local[k];
  }
  return y;
}

inline Vector apply(const SchwarzSmoother& s, const Vector& r) { return apply(s, r, s.mode); }

} // namespace lsamgdd

#endif // LSAMGDD_SMOOTHER_HPP
