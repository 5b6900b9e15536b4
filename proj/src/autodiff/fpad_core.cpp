#include "proxdiff/autodiff/fpad_core.hpp"

#include <cmath>
#include <stdexcept>

#include "proxdiff/oracle/cg.hpp"

namespace proxdiff {
namespace detail {

ImplicitJvpResult solve_linear_fixed_point(const std::function<Vec(const Vec&)>& t_apply,
                                           const std::function<Vec(const Vec&)>& t_apply_t,
                                           const Vec& b, double tol, int max_iters, double rho) {
  ImplicitJvpResult result;
  result.contraction_estimate = rho;

  if (rho < 0.999) {
    result.method = LinearSolveMethod::kNeumann;
    Vec x(b.size(), 0.0);
    const double safe_rho = std::max(rho, 0.1);
    for (int k = 0; k < max_iters; ++k) {
      Vec next = t_apply(x);
      axpy(next, 1.0, b);
      const double step = norm2(sub(next, x));
      x = std::move(next);
      result.iters = k + 1;
      if (step * safe_rho / (1.0 - safe_rho) <= tol) {
        result.converged = true;
        break;
      }
    }
    result.x = std::move(x);
    return result;
  }

  // Normal equations (I-T)^T (I-T) x = (I-T)^T b, solved by CG.
  result.method = LinearSolveMethod::kCgNormal;
  auto apply_i_minus_t = [&t_apply](const Vec& v) {
    Vec out = v;
    axpy(out, -1.0, t_apply(v));
    return out;
  };
  auto apply_i_minus_t_t = [&t_apply_t](const Vec& v) {
    Vec out = v;
    axpy(out, -1.0, t_apply_t(v));
    return out;
  };
  auto normal_op = [&](const Vec& v) { return apply_i_minus_t_t(apply_i_minus_t(v)); };
  const Vec rhs = apply_i_minus_t_t(b);
  CgResult cg = conjugate_gradient(normal_op, rhs, tol, max_iters);
  if (cg.breakdown)
    throw std::runtime_error("implicit solve: conjugate gradient breakdown on the normal system");
  result.converged = cg.converged;
  result.iters = cg.iters;
  result.x = std::move(cg.x);
  return result;
}

}  // namespace detail
}  // namespace proxdiff
