#ifndef PROXDIFF_ORACLE_CG_HPP
#define PROXDIFF_ORACLE_CG_HPP

#include <functional>

#include "proxdiff/core/vec.hpp"

namespace proxdiff {

struct CgResult {
  Vec x;
  bool converged = false;
  bool breakdown = false;  // encountered a zero-curvature direction
  int iters = 0;
  double rel_residual = 0.0;  // ||A x - b|| / ||b||
};

// Conjugate gradient for a symmetric positive definite action. Stops when
// ||A x - b|| <= tol * ||b||.
CgResult conjugate_gradient(const std::function<Vec(const Vec&)>& apply_a, const Vec& b,
                            double tol, int max_iters);

}  // namespace proxdiff

#endif
