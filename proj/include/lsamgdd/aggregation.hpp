#ifndef LSAMGDD_AGGREGATION_HPP
#define LSAMGDD_AGGREGATION_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "lsamgdd/errors.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

/// Disjoint cover of the node set: assignment[v] is the aggregate of node v.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t n_aggregates = 0;
};

/** \brief Per-aggregate interior/boundary index sets, subdomain coloring,
 *  and the row multiplicity bound filled in by the splitting stage.
 *
 * The subdomain of aggregate i is the concatenation of omega[i] (its own
 * nodes) and gamma[i] (the structural neighbors outside it); that ordering
 * is the local permutation used by every dense block downstream. The
 * Boolean partition-of-unity mask is 1 on the omega prefix and 0 on the
 * gamma tail.
 */
struct AggregateTopology {
  std::vector<std::vector<std::size_t>> omega;
  std::vector<std::vector<std::size_t>> gamma;
  std::vector<std::size_t> colors;
  std::size_t n_colors = 0;
  std::size_t n_nodes = 0;
  std::size_t multiplicity_max = 0;

  std::size_t n_aggregates() const { return omega.size(); }

  std::vector<std::size_t> subdomain(std::size_t i) const {
    std::vector<std::size_t> s = omega[i];
    s.insert(s.end(), gamma[i].begin(), gamma[i].end());
    return s;
  }

  std::vector<std::uint8_t> pou_mask(std::size_t i) const {
    std::vector<std::uint8_t> mask(omega[i].size() + gamma[i].size(), 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(omega[i].size()), 1);
    return mask;
  }
};

namespace detail {

constexpr std::size_t kUnaggregated = std::numeric_limits<std::size_t>::max();

} // namespace detail

/** \brief Greedy aggregation of the structural graph of a.
 *
 * Pass 1 scans nodes in ascending order and seeds an aggregate from any
 * node whose whole neighborhood is untouched. Pass 2 attaches each leftover
 * node to the pass-1 aggregate of its strongest neighbor (largest |a_ij|,
 * ties to the lowest aggregate id). Pass 3 turns isolated nodes into
 * singletons. The full sparsity pattern is the strength graph; no entries
 * are filtered.
 */
inline Partition standard_aggregation(const SparseMatrix& a) {
  if (a.n_rows() == 0) throw InputError("standard_aggregation: matrix is empty");
  if (a.n_rows() != a.n_cols()) throw DimError("standard_aggregation: matrix is not square");
  const std::size_t n = a.n_rows();
  std::vector<std::size_t> assignment(n, detail::kUnaggregated);
  std::size_t next = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] != detail::kUnaggregated) continue;
    bool has_neighbor = false, all_free = true;
    for (std::size_t k = a.row_begin(i); k < a.row_end(i) && all_free; ++k) {
      const std::size_t c = a.col_index(k);
      if (c == i) continue;
      has_neighbor = true;
      if (assignment[c] != detail::kUnaggregated) all_free = false;
    }
    if (!has_neighbor || !all_free) continue;
    assignment[i] = next;
    for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) assignment[a.col_index(k)] = next;
    ++next;
  }

  // Pass 2 works against the pass-1 snapshot: nodes attached here do not
  // attract further nodes.
  std::vector<std::pair<std::size_t, std::size_t>> attached;
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] != detail::kUnaggregated) continue;
    double best = -1.0;
    std::size_t best_agg = detail::kUnaggregated;
    for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
      const std::size_t c = a.col_index(k);
      if (c == i || assignment[c] == detail::kUnaggregated) continue;
      const double w = std::abs(a.value(k));
      if (w > best || (w == best && assignment[c] < best_agg)) {
        best = w;
        best_agg = assignment[c];
      }
    }
    if (best_agg != detail::kUnaggregated) attached.emplace_back(i, best_agg);
  }
  for (const auto& [node, agg] : attached) assignment[node] = agg;

  for (std::size_t i = 0; i < n; ++i)
    if (assignment[i] == detail::kUnaggregated) assignment[i] = next++;

  return Partition{std::move(assignment), next};
}

namespace detail {

/// Boolean tentative operator of a partition (one unit entry per row).
inline SparseMatrix tentative_operator(const Partition& p) {
  const std::size_t n = p.assignment.size();
  std::vector<std::size_t> offs(n + 1), cols(n);
  std::vector<double> vals(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) offs[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = p.assignment[i];
  return SparseMatrix(n, p.n_aggregates, std::move(offs), std::move(cols), std::move(vals));
}

} // namespace detail

/** \brief Repeatedly aggregate the coarse graph and compose the
 *  assignments, for coarser aggregates than one greedy pass yields.
 *
 * Stops early with a warning if the coarse graph collapses to one node.
 */
inline Partition multi_pass_aggregation(const SparseMatrix& a, std::size_t n_passes) {
  if (n_passes < 1) throw InputError("multi_pass_aggregation: need at least one pass");
  Partition part = standard_aggregation(a);
  std::vector<std::size_t> composed = part.assignment;
  SparseMatrix coarse = a;
  for (std::size_t pass = 1; pass < n_passes; ++pass) {
    if (part.n_aggregates <= 1) {
      std::cerr << "lsamgdd: warning: aggregation stopped after " << pass
                << " pass(es); the coarse graph collapsed to one node\n";
      break;
    }
    const SparseMatrix t = detail::tentative_operator(part);
    coarse = spgemm(spgemm(transpose(t), coarse, SpgemmMode::Symbolic), t, SpgemmMode::Symbolic);
    part = standard_aggregation(coarse);
    for (std::size_t v = 0; v < composed.size(); ++v) composed[v] = part.assignment[composed[v]];
  }
  return Partition{std::move(composed), part.n_aggregates};
}

/** \brief Interior and boundary index sets plus a subdomain coloring for a
 *  partition of the structural graph of a.
 *
 * gamma[i] collects the structural neighbors of aggregate i's nodes that
 * lie outside it. Two aggregates are adjacent when their subdomains
 * intersect; the coloring is greedy in descending degree order (ties to the
 * lower id) and its color count is recorded in n_colors.
 */
inline AggregateTopology build_topology(const SparseMatrix& a, const Partition& p) {
  const std::size_t n = a.n_rows();
  if (a.n_rows() != a.n_cols()) throw DimError("build_topology: matrix is not square");
  if (p.assignment.size() != n)
    throw InputError("build_topology: partition covers " + std::to_string(p.assignment.size()) +
                     " nodes, matrix has " + std::to_string(n));
  const std::size_t n_agg = p.n_aggregates;
  if (n_agg == 0) throw InputError("build_topology: partition has no aggregates");
  for (std::size_t v = 0; v < n; ++v)
    if (p.assignment[v] >= n_agg) throw InputError("build_topology: aggregate id out of range");

  AggregateTopology topo;
  topo.n_nodes = n;
  topo.omega.resize(n_agg);
  topo.gamma.resize(n_agg);
  for (std::size_t v = 0; v < n; ++v) topo.omega[p.assignment[v]].push_back(v);
  for (std::size_t i = 0; i < n_agg; ++i)
    if (topo.omega[i].empty()) throw InputError("build_topology: aggregate " + std::to_string(i) + " is empty");

  for (std::size_t i = 0; i < n_agg; ++i) {
    std::vector<std::size_t>& g = topo.gamma[i];
    for (std::size_t u : topo.omega[i])
      for (std::size_t k = a.row_begin(u); k < a.row_end(u); ++k) {
        const std::size_t c = a.col_index(k);
        if (p.assignment[c] != i) g.push_back(c);
      }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }

  // Subdomain-intersection adjacency: every node knows which subdomains
  // contain it, and all pairs on one node are adjacent.
  std::vector<std::vector<std::size_t>> holders(n);
  for (std::size_t v = 0; v < n; ++v) holders[v].push_back(p.assignment[v]);
  for (std::size_t i = 0; i < n_agg; ++i)
    for (std::size_t gnode : topo.gamma[i]) holders[gnode].push_back(i);
  std::vector<std::vector<std::size_t>> adj(n_agg);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t x = 0; x < holders[v].size(); ++x)
      for (std::size_t y = x + 1; y < holders[v].size(); ++y) {
        adj[holders[v][x]].push_back(holders[v][y]);
        adj[holders[v][y]].push_back(holders[v][x]);
      }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<std::size_t> order(n_agg);
  for (std::size_t i = 0; i < n_agg; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return adj[x].size() > adj[y].size(); });
  topo.colors.assign(n_agg, detail::kUnaggregated);
  std::size_t max_color = 0;
  for (std::size_t i : order) {
    std::vector<bool> used(adj[i].size() + 1, false);
    for (std::size_t j : adj[i])
      if (topo.colors[j] != detail::kUnaggregated && topo.colors[j] < used.size())
        used[topo.colors[j]] = true;
    std::size_t color = 0;
    while (used[color]) ++color;
    topo.colors[i] = color;
    max_color = std::max(max_color, color);
  }
  topo.n_colors = max_color + 1;
  return topo;
}

/** \brief Write a partition as plain text: node count, aggregate count,
 *  then one aggregate id per line.
 */
inline void partition_write(const std::string& path, const Partition& p) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out << p.assignment.size() << " " << p.n_aggregates << "\n";
  for (std::size_t v : p.assignment) out << v << "\n";
  if (!out) throw FormatError(path + ": write failed");
}

inline Partition partition_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  long long n = -1, n_agg = -1;
  if (!(in >> n >> n_agg) || n < 0 || n_agg < 0)
    throw FormatError(path + ": malformed partition header");
  Partition p;
  p.n_aggregates = static_cast<std::size_t>(n_agg);
  p.assignment.resize(static_cast<std::size_t>(n));
  for (long long v = 0; v < n; ++v) {
    long long id = -1;
    if (!(in >> id) || id < 0 || id >= n_agg)
      throw FormatError(path + ": bad aggregate id on line " + std::to_string(v + 2));
    p.assignment[static_cast<std::size_t>(v)] = static_cast<std::size_t>(id);
  }
  return p;
}

} // namespace lsamgdd

#endif // LSAMGDD_AGGREGATION_HPP
