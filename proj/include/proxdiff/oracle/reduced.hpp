#ifndef PROXDIFF_ORACLE_REDUCED_HPP
#define PROXDIFF_ORACLE_REDUCED_HPP

#include "proxdiff/core/dense_matrix.hpp"
#include "proxdiff/problems/instance.hpp"

namespace proxdiff {

// The tangent-space linear system behind the derivative of the solution
// mapping: hessian_reduced z = rhs_jvp, with the derivative along du given by
// -z embedded back into full space.
struct ReducedSystem {
  ActivePattern pattern;
  DenseMatrix hessian_reduced;  // dim_tangent x dim_tangent, symmetric
  Vec rhs_jvp;                  // dim_tangent
  double min_eigenvalue = 0.0;  // smallest eigenvalue of hessian_reduced
};

// Assembles the tangent-restricted Hessian of the objective at x_star (the
// data-term block A^T A plus, for L > 1, the curvature of the rowwise norm
// along its active rows) and the u-derivative of the tangent gradient along
// du. Throws when the reduced Hessian is numerically singular.
ReducedSystem build_reduced_system(const ProblemInstance& problem, const Vec& x_star,
                                   const ParamDelta& du);

// Solves the reduced system by conjugate gradient and embeds the result into
// full space (zeros off the pattern): the derivative of the solution mapping
// applied to the direction baked into `sys`.
Vec solve_dpsi_jvp(const ReducedSystem& sys, double tol = 1e-12);

// Transpose mapping: xbar -> xbar * (derivative of the solution mapping).
ParamDelta solve_dpsi_vjp(const ProblemInstance& problem, const Vec& x_star, const Vec& xbar,
                          double tol = 1e-12);

// Helpers shared with the tests: embed/restrict between tangent coordinates
// (active rows, row-major) and full space.
Vec pattern_restrict(const ActivePattern& pat, const Vec& full);
Vec pattern_embed(const ActivePattern& pat, const Vec& reduced);

}  // namespace proxdiff

#endif
