#include "proxdiff/oracle/cg.hpp"

#include <cmath>

namespace proxdiff {

CgResult conjugate_gradient(const std::function<Vec(const Vec&)>& apply_a, const Vec& b,
                            double tol, int max_iters) {
  CgResult result;
  result.x = Vec(b.size(), 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }

  Vec r = b;  // residual of x = 0
  Vec p = r;
  double rr = dot(r, r);
  for (int k = 0; k < max_iters; ++k) {
    Vec ap = apply_a(p);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      result.breakdown = true;
      result.rel_residual = std::sqrt(rr) / bnorm;
      return result;
    }
    const double step = rr / curvature;
    axpy(result.x, step, p);
    axpy(r, -step, ap);
    const double rr_next = dot(r, r);
    result.iters = k + 1;
    if (std::sqrt(rr_next) <= tol * bnorm) {
      result.converged = true;
      result.rel_residual = std::sqrt(rr_next) / bnorm;
      return result;
    }
    const double ratio = rr_next / rr;
    rr = rr_next;
    scale(p, ratio);
    axpy(p, 1.0, r);
  }
  result.rel_residual = std::sqrt(rr) / bnorm;
  return result;
}

}  // namespace proxdiff
