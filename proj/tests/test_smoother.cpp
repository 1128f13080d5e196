#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lsamgdd/aggregation.hpp"
#include "lsamgdd/eigen.hpp"
#include "lsamgdd/problems.hpp"
#include "lsamgdd/smoother.hpp"
#include "test_util.hpp"

using lsamgdd::AggregateTopology;
using lsamgdd::DenseMatrix;
using lsamgdd::Partition;
using lsamgdd::SchwarzMode;
using lsamgdd::SparseMatrix;
using lsamgdd::Vector;

namespace {

struct Setup {
  SparseMatrix a;
  AggregateTopology topo;
};

Setup chain_setup() {
  const SparseMatrix a = testutil::laplacian_1d(9);
  Partition p;
  p.assignment = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  p.n_aggregates = 3;
  return {a, lsamgdd::build_topology(a, p)};
}

/// Dense reference of one Schwarz sweep assembled column by column.
DenseMatrix dense_operator(const lsamgdd::SchwarzSmoother& s, SchwarzMode mode, std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    const Vector col = lsamgdd::apply(s, e, mode);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out;
}

/// Reference sweep built from scratch with dense inverses.
DenseMatrix reference_operator(const SparseMatrix& a, const AggregateTopology& topo,
                               SchwarzMode mode) {
  const std::size_t n = a.n_rows();
  DenseMatrix total(n, n);
  for (std::size_t i = 0; i < topo.n_aggregates(); ++i) {
    const auto sub = topo.subdomain(i);
    const auto mask = topo.pou_mask(i);
    const DenseMatrix block = lsamgdd::submatrix(a, sub, sub);
    const DenseMatrix inv = lsamgdd::pseudo_inverse(block, 1e-13);
    for (std::size_t r = 0; r < sub.size(); ++r)
      for (std::size_t c = 0; c < sub.size(); ++c) {
        double w = inv(r, c);
        if (mode == SchwarzMode::RAS && !mask[r]) w = 0.0;
        if (mode == SchwarzMode::RAST && !mask[c]) w = 0.0;
        total(sub[r], sub[c]) += w;
      }
  }
  return total;
}

} // namespace

TEST_CASE("factors cover each subdomain block", "[smoother]") {
  const Setup s = chain_setup();
  const auto sm = lsamgdd::build_smoother(s.a, s.topo);
  REQUIRE(sm.subdomains.size() == 3);
  REQUIRE(sm.subdomains[0].size() == 4);
  REQUIRE(sm.subdomains[1].size() == 5);
  REQUIRE(sm.subdomains[2].size() == 4);
  REQUIRE(sm.omega_sizes == std::vector<std::size_t>{3, 3, 3});
  REQUIRE(sm.n == 9);
}

TEST_CASE("all three sweeps match dense references", "[smoother]") {
  auto gen = testutil::rng(80);
  const std::size_t n = 12;
  // Random SPD operator with a banded pattern so overlaps are non-trivial.
  std::vector<lsamgdd::Triplet> trips;
  for (std::size_t i = 0; i < n; ++i) {
    trips.push_back({i, i, 4.0 + static_cast<double>(i % 3)});
    if (i + 1 < n) {
      trips.push_back({i, i + 1, -1.2});
      trips.push_back({i + 1, i, -1.2});
    }
    if (i + 2 < n) {
      trips.push_back({i, i + 2, -0.4});
      trips.push_back({i + 2, i, -0.4});
    }
  }
  const SparseMatrix a = lsamgdd::csr_from_triplets(n, n, std::move(trips));
  Partition p;
  p.assignment = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2};
  p.n_aggregates = 3;
  const AggregateTopology topo = lsamgdd::build_topology(a, p);
  const auto sm = lsamgdd::build_smoother(a, topo);

  for (SchwarzMode mode : {SchwarzMode::RAS, SchwarzMode::RAST, SchwarzMode::ASM}) {
    const DenseMatrix got = dense_operator(sm, mode, n);
    const DenseMatrix want = reference_operator(a, topo, mode);
    REQUIRE(testutil::rel_frob_diff(got, want) < 1e-12);
  }
}

TEST_CASE("restricted sweep and its transpose are adjoint", "[smoother]") {
  lsamgdd::AnisoParams ap;
  ap.nx = 10;
  ap.ny = 10;
  ap.epsilon = 1e-2;
  ap.theta = 0.6;
  const auto sys = lsamgdd::build_rotated_aniso(ap);
  const Partition p = lsamgdd::standard_aggregation(sys.A);
  const AggregateTopology topo = lsamgdd::build_topology(sys.A, p);
  const auto sm = lsamgdd::build_smoother(sys.A, topo);
  auto gen = testutil::rng(81);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector x = testutil::random_vector(100, gen);
    const Vector y = testutil::random_vector(100, gen);
    const double lhs = lsamgdd::dot(y, lsamgdd::apply(sm, x, SchwarzMode::RAS));
    const double rhs = lsamgdd::dot(lsamgdd::apply(sm, y, SchwarzMode::RAST), x);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12).margin(1e-13));
  }
}

TEST_CASE("overlapping additive sweep is symmetric positive definite", "[smoother]") {
  const Setup s = chain_setup();
  const auto sm = lsamgdd::build_smoother(s.a, s.topo);
  const DenseMatrix op = dense_operator(sm, SchwarzMode::ASM, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      REQUIRE(op(i, j) == Catch::Approx(op(j, i)).margin(1e-13));
  const auto [values, vectors, n_discarded] = lsamgdd::sym_eig(op);
  REQUIRE(values.front() > 0.0);
}

TEST_CASE("single aggregate smoother is the exact inverse", "[smoother]") {
  const SparseMatrix a = testutil::laplacian_1d(6);
  Partition p;
  p.assignment = {0, 0, 0, 0, 0, 0};
  p.n_aggregates = 1;
  const AggregateTopology topo = lsamgdd::build_topology(a, p);
  const auto sm = lsamgdd::build_smoother(a, topo);
  auto gen = testutil::rng(82);
  const Vector r = testutil::random_vector(6, gen);
  for (SchwarzMode mode : {SchwarzMode::RAS, SchwarzMode::RAST, SchwarzMode::ASM}) {
    const Vector e = lsamgdd::apply(sm, r, mode);
    const Vector back = lsamgdd::spmv(a, e);
    for (std::size_t i = 0; i < 6; ++i) REQUIRE(back[i] == Catch::Approx(r[i]).margin(1e-11));
  }
}

TEST_CASE("default mode is stored at construction", "[smoother]") {
  const Setup s = chain_setup();
  const auto ras = lsamgdd::build_smoother(s.a, s.topo, SchwarzMode::RAS);
  const auto asm_sm = lsamgdd::build_smoother(s.a, s.topo, SchwarzMode::ASM);
  auto gen = testutil::rng(83);
  const Vector r = testutil::random_vector(9, gen);
  REQUIRE(lsamgdd::apply(ras, r) == lsamgdd::apply(ras, r, SchwarzMode::RAS));
  REQUIRE(lsamgdd::apply(asm_sm, r) == lsamgdd::apply(asm_sm, r, SchwarzMode::ASM));
}

TEST_CASE("sweep rejects wrong residual length", "[smoother]") {
  const Setup s = chain_setup();
  const auto sm = lsamgdd::build_smoother(s.a, s.topo);
  const Vector bad(5, 1.0);
  REQUIRE_THROWS_AS(lsamgdd::apply(sm, bad, SchwarzMode::RAS), lsamgdd::DimError);
}
