#ifndef LSAMGDD_LSAMGDD_HPP
#define LSAMGDD_LSAMGDD_HPP

/** \file Umbrella header for the least-squares multilevel domain
 *  decomposition toolkit.
 *
 * The toolkit preconditions symmetric positive definite systems given in
 * factored form A = GᵀG. Aggregation of the structural graph yields
 * overlapping subdomains, the factor is split into weighted local pieces,
 * local generalized eigenproblems select the coarse basis per aggregate,
 * and overlapping Schwarz smoothing plus its adjoint wrap the coarse
 * correction into a symmetric positive definite multilevel cycle for use
 * inside conjugate gradients.
 */

#include "lsamgdd/aggregation.hpp"
#include "lsamgdd/dense.hpp"
#include "lsamgdd/eigen.hpp"
#include "lsamgdd/errors.hpp"
#include "lsamgdd/hierarchy.hpp"
#include "lsamgdd/krylov.hpp"
#include "lsamgdd/mmio.hpp"
#include "lsamgdd/problems.hpp"
#include "lsamgdd/smoother.hpp"
#include "lsamgdd/sparse.hpp"
#include "lsamgdd/splitting.hpp"

#endif // LSAMGDD_LSAMGDD_HPP
