#ifndef PROXDIFF_PROBLEMS_NONSMOOTH_HPP
#define PROXDIFF_PROBLEMS_NONSMOOTH_HPP

#include "proxdiff/core/vec.hpp"
#include "proxdiff/problems/pattern.hpp"

namespace proxdiff {

// lambda * sum_r ||x_r||_2 over the rows of the N x L view of a flat vector.
// L == 1 is the absolute-value sum; L > 1 the rowwise group norm. All
// operations share the rowwise code path.
//
// Tie rule at the shrinkage kink: a row with ||w_r|| exactly equal to the
// threshold is treated as inactive (derivative 0), matching the limit from
// the inactive side and keeping derivative iterates inside the tangent space.
class NonsmoothTerm {
 public:
  NonsmoothTerm(int rows, int cols, double weight);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double weight() const { return weight_; }
  int dim() const { return rows_ * cols_; }

  double value(const Vec& x) const;

  // prox of (alpha * this) at w, i.e. rowwise shrinkage by t = alpha*weight.
  Vec prox(const Vec& w, double alpha) const;

  // Derivative of the prox at base point (w, alpha*weight), applied to the
  // perturbation (dw, dlambda); alpha is held fixed.
  Vec prox_jvp(const Vec& w, double alpha, const Vec& dw, double dlambda) const;

  // Transpose actions of the same derivative: vbar -> vbar * D_w prox and
  // vbar -> vbar * D_lambda prox (a scalar).
  Vec prox_vjp_w(const Vec& w, double alpha, const Vec& vbar) const;
  double prox_vjp_lambda(const Vec& w, double alpha, const Vec& vbar) const;

  // Projection of v onto the subdifferential of this at x.
  Vec subgrad_project(const Vec& x, const Vec& v) const;

  // Whether v is a subgradient at x, up to tol.
  bool subgrad_contains(const Vec& x, const Vec& v, double tol) const;

  ActivePattern pattern(const Vec& x, double atol = 1e-10) const;

  // Rows of w sitting exactly on the shrinkage kink ||w_r|| == alpha*weight,
  // where the derivative exists only one-sidedly and the tie rule applies.
  int kink_rows(const Vec& w, double alpha) const;

  // Riemannian gradient on the row-support manifold of x: weight * x_r/||x_r||
  // on active rows, zero elsewhere.
  Vec riem_grad(const Vec& x, const ActivePattern& pat) const;

  // Action of the Riemannian Hessian of this restricted to the row-support
  // manifold: weight * (v_r/||x_r|| - <x_r,v_r> x_r/||x_r||^3) per active row.
  // Vanishes identically when L == 1.
  Vec riem_hess_apply(const Vec& x, const ActivePattern& pat, const Vec& v) const;

 private:
  int rows_;
  int cols_;
  double weight_;
};

inline ActivePattern identify_pattern(const NonsmoothTerm& term, const Vec& x,
                                      double atol = 1e-10) {
  return term.pattern(x, atol);
}

inline Vec subgrad_project(const NonsmoothTerm& term, const Vec& x, const Vec& v) {
  return term.subgrad_project(x, v);
}

// Standalone forms of the two shipped shrinkage operators and their
// derivatives; t is the full threshold (step times weight).
Vec l1_prox(const Vec& w, double t);
Vec l1_prox_jvp(const Vec& w, double t, const Vec& dw, double dt);
Vec group_prox(const Vec& w, int cols, double t);
Vec group_prox_jvp(const Vec& w, int cols, double t, const Vec& dw, double dt);

}  // namespace proxdiff

#endif
