#ifndef PROXDIFF_PROBLEMS_SMOOTH_HPP
#define PROXDIFF_PROBLEMS_SMOOTH_HPP

#include <functional>

#include "proxdiff/core/dense_matrix.hpp"
#include "proxdiff/core/vec.hpp"
#include "proxdiff/problems/param_pack.hpp"

namespace proxdiff {

// Capability record for the smooth data term f(x, u). The shipped builder is
// the least-squares term 1/2 ||A X - B||_F^2 on the flat N*L variable.
struct SmoothTerm {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  // Hessian-vector product at `at` applied to v (constant in `at` for least
  // squares, but the point is part of the contract).
  std::function<Vec(const Vec& at, const Vec& v)> hvp;
  // u-pathway of the gradient: directional derivative of grad in u along du,
  // and its transpose.
  std::function<Vec(const Vec& x, const ParamDelta& du)> cross_jvp;
  std::function<ParamDelta(const Vec& x, const Vec& vbar)> cross_vjp;
  double lipschitz = 0.0;  // bound on ||grad f(x) - grad f(y)|| / ||x - y||
};

// 1/2 ||A x - b||^2 for the single-target problem (L == 1).
SmoothTerm lasso_smooth(const ParamPack& u);

// 1/2 ||A X - B||_F^2 on the flat N*L variable; lasso_smooth is the L == 1
// case of this builder.
SmoothTerm least_squares_smooth(const ParamPack& u);

}  // namespace proxdiff

#endif
