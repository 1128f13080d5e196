#ifndef LSAMGDD_PROBLEMS_HPP
#define LSAMGDD_PROBLEMS_HPP

#include <cmath>
#include <numbers>
#include <cstddef>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lsamgdd/errors.hpp"
#include "lsamgdd/mmio.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

/** \brief A least-squares system: the factor G, the normal matrix A = GᵀG,
 *  and a right-hand side.
 *
 * A is always assembled from G with the symbolic product so its pattern is
 * the structural one, which the overlap logic downstream relies on.
 */
struct LeastSquaresSystem {
  SparseMatrix G;
  SparseMatrix A;
  Vector rhs;
  std::string label;
};

/** \brief Rotated anisotropic diffusion on the unit square.
 *
 * Interior nodes of an (nx+2)-by-(ny+2) grid, lexicographic by y then x.
 * The diffusion tensor is Q·diag(epsilon, 1)·Qᵀ with rotation angle theta.
 */
struct AnisoParams {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double epsilon = 1.0;
  double theta = 0.0;

  double hx() const { return 1.0 / static_cast<double>(nx + 1); }
  double hy() const { return 1.0 / static_cast<double>(ny + 1); }
};

/** \brief Closed-field-line anisotropic diffusion with a time-step mass
 *  term, discretized the same way as the rotated problem but with a
 *  node-dependent direction field.
 */
struct FieldParams {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double kpar = 1.0;
  double kperp = 1.0;
  double dt = 1e-3;

  double hx() const { return 1.0 / static_cast<double>(nx + 1); }
  double hy() const { return 1.0 / static_cast<double>(ny + 1); }
};

namespace detail {

/// Samples of sin(pi x)·sin(pi y) at the interior nodes.
inline Vector smooth_samples(std::size_t nx, std::size_t ny) {
  const double hx = 1.0 / static_cast<double>(nx + 1);
  const double hy = 1.0 / static_cast<double>(ny + 1);
  Vector s(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = static_cast<double>(i + 1) * hx;
      const double y = static_cast<double>(j + 1) * hy;
      s[j * nx + i] = std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    }
  return s;
}

/** Append the two rows of bmatᵀ·(forward-difference gradient) at one node.
 *
 * bmat_t is the 2x2 transposed direction factor, row-major:
 * row 0 scales Dx+, Dy+ by (b00, b01); row 1 by (b10, b11). Homogeneous
 * Dirichlet: the forward difference at the last interior column or row uses
 * the zero exterior value, so only the diagonal entry remains.
 */
inline void append_gradient_rows(std::vector<Triplet>& trips, std::size_t row0, std::size_t i,
                                 std::size_t j, std::size_t nx, std::size_t ny, double hx,
                                 double hy, const double bmat_t[4]) {
  const std::size_t node = j * nx + i;
  const bool has_east = i + 1 < nx;
  const bool has_north = j + 1 < ny;
  for (std::size_t r = 0; r < 2; ++r) {
    const double cx = bmat_t[2 * r] / hx;
    const double cy = bmat_t[2 * r + 1] / hy;
    trips.push_back({row0 + r, node, -cx - cy});
    if (has_east) trips.push_back({row0 + r, node + 1, cx});
    if (has_north) trips.push_back({row0 + r, node + nx, cy});
  }
}

} // namespace detail

/** \brief Build the rotated anisotropic model problem.
 *
 * G holds two rows per node (the direction-weighted forward differences);
 * A = GᵀG; the right-hand side is A applied to smooth samples.
 */
inline LeastSquaresSystem build_rotated_aniso(const AnisoParams& p) {
  if (p.nx < 2 || p.ny < 2) throw InputError("build_rotated_aniso: nx and ny must be at least 2");
  if (!(p.epsilon > 0.0 && p.epsilon <= 1.0))
    throw InputError("build_rotated_aniso: epsilon must lie in (0, 1]");
  const std::size_t n = p.nx * p.ny;
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const double se = std::sqrt(p.epsilon);
  // Direction factor Bᵀ = sqrt(diag(epsilon,1))·Qᵀ for Q = [[c,-s],[s,c]].
  const double bmat_t[4] = {se * c, se * s, -s, c};

  std::vector<Triplet> trips;
  trips.reserve(6 * n);
  for (std::size_t j = 0; j < p.ny; ++j)
    for (std::size_t i = 0; i < p.nx; ++i)
      detail::append_gradient_rows(trips, 2 * (j * p.nx + i), i, j, p.nx, p.ny, p.hx(), p.hy(),
                                   bmat_t);

  LeastSquaresSystem sys;
  sys.G = csr_from_triplets(2 * n, n, std::move(trips));
  sys.A = spgemm(transpose(sys.G), sys.G, SpgemmMode::Symbolic);
  sys.rhs = spmv(sys.A, detail::smooth_samples(p.nx, p.ny));
  std::ostringstream label;
  label << "rotated_aniso nx=" << p.nx << " ny=" << p.ny << " epsilon=" << p.epsilon
        << " theta=" << p.theta;
  sys.label = label.str();
  return sys;
}

/** \brief Build the closed-field-line model problem.
 *
 * The unit direction field comes from the stream function
 * T = cos(pi(x-1/2))·cos(pi(y-1/2)); where the field vanishes the direction
 * defaults to (1, 0). G has two gradient rows per node weighted by
 * sqrt(kpar) along the field and sqrt(kperp) across it, followed by n
 * diagonal rows of sqrt(1/dt).
 */
inline LeastSquaresSystem build_closed_fieldline(const FieldParams& p) {
  if (p.nx < 2 || p.ny < 2)
    throw InputError("build_closed_fieldline: nx and ny must be at least 2");
  if (!(p.kperp > 0.0) || !(p.kpar >= p.kperp))
    throw InputError("build_closed_fieldline: need kpar >= kperp > 0");
  if (!(p.dt > 0.0)) throw InputError("build_closed_fieldline: dt must be positive");
  const std::size_t n = p.nx * p.ny;
  const double spar = std::sqrt(p.kpar), sperp = std::sqrt(p.kperp);
  const double sdt = std::sqrt(1.0 / p.dt);

  std::vector<Triplet> trips;
  trips.reserve(6 * n + n);
  for (std::size_t j = 0; j < p.ny; ++j)
    for (std::size_t i = 0; i < p.nx; ++i) {
      const double x = static_cast<double>(i + 1) * p.hx();
      const double y = static_cast<double>(j + 1) * p.hy();
      const double cx = std::cos(std::numbers::pi * (x - 0.5)), sx = std::sin(std::numbers::pi * (x - 0.5));
      const double cy = std::cos(std::numbers::pi * (y - 0.5)), sy = std::sin(std::numbers::pi * (y - 0.5));
      const double field_x = std::numbers::pi * cx * sy;  // -dT/dy
      const double field_y = -std::numbers::pi * sx * cy; //  dT/dx
      const double mag = std::hypot(field_x, field_y);
      double bx = 1.0, by = 0.0;
      if (mag >= 1e-14) {
        bx = field_x / mag;
        by = field_y / mag;
      }
      const double bmat_t[4] = {spar * bx, spar * by, -sperp * by, sperp * bx};
      detail::append_gradient_rows(trips, 2 * (j * p.nx + i), i, j, p.nx, p.ny, p.hx(), p.hy(),
                                   bmat_t);
    }
  for (std::size_t k = 0; k < n; ++k) trips.push_back({2 * n + k, k, sdt});

  LeastSquaresSystem sys;
  sys.G = csr_from_triplets(3 * n, n, std::move(trips));
  sys.A = spgemm(transpose(sys.G), sys.G, SpgemmMode::Symbolic);
  sys.rhs = spmv(sys.A, detail::smooth_samples(p.nx, p.ny));
  std::ostringstream label;
  label << "closed_fieldline nx=" << p.nx << " ny=" << p.ny << " kpar=" << p.kpar
        << " kperp=" << p.kperp << " dt=" << p.dt;
  sys.label = label.str();
  return sys;
}

/** \brief Ingest a factor G from a Matrix Market file.
 *
 * The right-hand side defaults to Gᵀ(G·1) when no path is given. Inputs
 * whose normal matrix has a non-positive diagonal entry are accepted with a
 * rank-deficiency warning on standard error.
 */
inline LeastSquaresSystem load_system(const std::string& g_path, const std::string& rhs_path = "") {
  LeastSquaresSystem sys;
  sys.G = mm_read(g_path);
  if (sys.G.n_rows() == 0 || sys.G.n_cols() == 0)
    throw InputError(g_path + ": factor has an empty dimension");
  sys.A = spgemm(transpose(sys.G), sys.G, SpgemmMode::Symbolic);
  if (rhs_path.empty()) {
    sys.rhs = spmv_transpose(sys.G, spmv(sys.G, Vector(sys.G.n_cols(), 1.0)));
  } else {
    sys.rhs = mm_read_vector(rhs_path);
    if (sys.rhs.size() != sys.A.n_rows())
      throw DimError(rhs_path + ": right-hand side length " + std::to_string(sys.rhs.size()) +
                     " does not match system size " + std::to_string(sys.A.n_rows()));
  }
  bool deficient = false;
  for (std::size_t i = 0; i < sys.A.n_rows() && !deficient; ++i) {
    double diag = 0.0;
    for (std::size_t k = sys.A.row_begin(i); k < sys.A.row_end(i); ++k)
      if (sys.A.col_index(k) == i) diag = sys.A.value(k);
    if (!(diag > 0.0)) deficient = true;
  }
  if (deficient)
    std::cerr << "lsamgdd: warning: " << g_path
              << ": normal matrix has a non-positive diagonal entry; the factor looks rank"
                 " deficient\n";
  sys.label = "mtx " + g_path;
  return sys;
}

} // namespace lsamgdd

#endif // LSAMGDD_PROBLEMS_HPP
