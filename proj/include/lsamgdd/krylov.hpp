#ifndef LSAMGDD_KRYLOV_HPP
#define LSAMGDD_KRYLOV_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "lsamgdd/dense.hpp"
#include "lsamgdd/eigen.hpp"
#include "lsamgdd/errors.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

/** \brief Outcome of a preconditioned conjugate gradient solve.
 *
 * avg_conv_factor is the geometric mean residual reduction per iteration;
 * iters_to_tenth = ln(0.1)/ln(avg_conv_factor) is the equivalent cost of
 * one order of magnitude. operator_complexity and the timings are filled by
 * the caller.
 */
struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  double avg_conv_factor = 0.0;
  double iters_to_tenth = 0.0;
  double operator_complexity = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
};

/** \brief Preconditioned conjugate gradients from a zero initial guess.
 *
 * Stops when ||r_k|| <= tol·||r_0||. Both the preconditioned residual
 * product and the curvature are guarded: a non-positive value raises
 * IndefiniteError, so a successful solve certifies positive definiteness
 * along the Krylov directions it visited.
 */
template <class ApplyA, class ApplyB>
std::pair<Vector, SolveReport> pcg(ApplyA&& apply_a, ApplyB&& apply_b, const Vector& b,
                                   double tol = 1e-8, std::size_t maxit = 1000) {
  SolveReport report;
  const std::size_t n = b.size();
  Vector x(n, 0.0);
  Vector r = b;
  const double r0 = norm2(r);
  report.residual_history.push_back(r0);
  if (r0 == 0.0) {
    report.converged = true;
    return {std::move(x), std::move(report)};
  }

  Vector z = apply_b(r);
  double rz = dot(r, z);
  if (!(rz > 0.0)) throw IndefiniteError("pcg: preconditioned product <r, Br> is not positive");
  Vector p = z;
  std::size_t k = 0;
  while (k < maxit) {
    const Vector ap = apply_a(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw IndefiniteError("pcg: curvature <p, Ap> is not positive");
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    ++k;
    const double rn = norm2(r);
    report.residual_history.push_back(rn);
    if (rn <= tol * r0) {
      report.converged = true;
      break;
    }
    z = apply_b(r);
    const double rz_next = dot(r, z);
    if (!(rz_next > 0.0)) throw IndefiniteError("pcg: preconditioned product <r, Br> is not positive");
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  report.iterations = k;
  const double ratio = report.residual_history.back() / r0;
  report.avg_conv_factor = k > 0 ? std::pow(ratio, 1.0 / static_cast<double>(k)) : 1.0;
  if (report.avg_conv_factor > 0.0 && report.avg_conv_factor < 1.0)
    report.iters_to_tenth = std::log(0.1) / std::log(report.avg_conv_factor);
  else if (report.avg_conv_factor == 0.0)
    report.iters_to_tenth = 0.0;
  else
    report.iters_to_tenth = std::numeric_limits<double>::infinity();
  return {std::move(x), std::move(report)};
}

/** \brief Extreme eigenvalues of the preconditioned operator B·A.
 *
 * Both operators are applied densely column by column (the size is capped
 * at 2000); the product is symmetrized through the square root of A, whose
 * spectrum it shares, and passed to the dense eigensolver. Returns
 * (smallest, largest).
 */
template <class ApplyA, class ApplyB>
std::pair<double, double> precond_spectrum(ApplyA&& apply_a, ApplyB&& apply_b, std::size_t n) {
  if (n > 2000) throw SizeError("precond_spectrum: dimension " + std::to_string(n) + " exceeds 2000");
  if (n == 0) throw InputError("precond_spectrum: dimension is zero");

  DenseMatrix a_dense(n, n);
  {
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = 1.0;
      const Vector col = apply_a(e);
      if (col.size() != n) throw DimError("precond_spectrum: operator changes dimension");
      for (std::size_t i = 0; i < n; ++i) a_dense(i, j) = col[i];
      e[j] = 0.0;
    }
  }
  symmetrize(a_dense);
  const EigenPairs ea = sym_eig(a_dense);
  DenseMatrix root(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::max(ea.values[k], 0.0);
    const double s = std::sqrt(lam);
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vis = ea.vectors(i, k) * s;
      if (vis == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) root(i, j) += vis * ea.vectors(j, k);
    }
  }

  DenseMatrix sym(n, n);
  Vector w(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) w[i] = root(i, j);
    const Vector bw = apply_b(w);
    if (bw.size() != n) throw DimError("precond_spectrum: operator changes dimension");
    const Vector col = matvec(root, bw);
    for (std::size_t i = 0; i < n; ++i) sym(i, j) = col[i];
  }
  symmetrize(sym);
  const EigenPairs es = sym_eig(sym);
  return {es.values.front(), es.values.back()};
}

} // namespace lsamgdd

#endif // LSAMGDD_KRYLOV_HPP
