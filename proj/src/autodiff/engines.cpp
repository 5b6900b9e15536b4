#include "proxdiff/autodiff/engines.hpp"

#include <stdexcept>

namespace proxdiff {

FpadAnchor make_fpad_anchor(const ProblemInstance& problem, const Vec& x, double alpha,
                            double beta) {
  if (static_cast<int>(x.size()) != problem.dim())
    throw std::invalid_argument("make_fpad_anchor: dimension mismatch");
  FpadAnchor anchor;
  anchor.x = x;
  anchor.nu = problem.g.subgrad_project(x, scaled(problem.f.grad(x), -1.0));
  anchor.w = x;
  axpy(anchor.w, alpha, anchor.nu);
  anchor.alpha = alpha;
  anchor.beta = beta;
  anchor.pattern = problem.g.pattern(x);
  return anchor;
}

FrozenOps<ParamDelta> frozen_ops(const ProblemInstance& problem, const FpadAnchor& anchor) {
  FrozenOps<ParamDelta> ops;
  ops.dim = problem.dim();
  ops.alpha = anchor.alpha;
  ops.beta = anchor.beta;
  const NonsmoothTerm& g = problem.g;
  const SmoothTerm& f = problem.f;
  const Vec w = anchor.w;
  const Vec x = anchor.x;
  const double alpha = anchor.alpha;
  ops.prox_jvp = [&g, w, alpha](const Vec& v) { return g.prox_jvp(w, alpha, v, 0.0); };
  ops.prox_vjp = [&g, w, alpha](const Vec& v) { return g.prox_vjp_w(w, alpha, v); };
  ops.hvp = [&f, x](const Vec& v) { return f.hvp(x, v); };
  ops.prox_pack_jvp = [&g, w, alpha, dim = ops.dim](const ParamDelta& du) {
    return g.prox_jvp(w, alpha, Vec(static_cast<std::size_t>(dim), 0.0), du.d_reg_weight);
  };
  ops.prox_pack_vjp_acc = [&g, w, alpha](const Vec& vbar, ParamDelta& acc, double c) {
    acc.d_reg_weight += c * g.prox_vjp_lambda(w, alpha, vbar);
  };
  ops.cross_jvp = [&f, x](const ParamDelta& du) { return f.cross_jvp(x, du); };
  ops.cross_vjp_acc = [&f, x](const Vec& vbar, ParamDelta& acc, double c) {
    acc.add_scaled(f.cross_vjp(x, vbar), c);
  };
  ops.pack_zero = [&u = problem.u]() { return ParamDelta::zeros_like(u); };
  ops.pack_bytes = [](const ParamDelta& p) {
    return (p.d_design.entries().size() + p.d_target.entries().size() + 1) * sizeof(double);
  };
  return ops;
}

std::vector<Vec> ad_forward(const ProblemInstance& problem, const SolveTrace& trace,
                            const ParamDelta& du, int* kink_hits) {
  const int k_max = trace.iterations();
  if (k_max == 0 || trace.y.empty())
    throw std::invalid_argument("ad_forward: trace was not recorded");
  const std::size_t dim = static_cast<std::size_t>(problem.dim());
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);

  if (kink_hits) *kink_hits = 0;
  TangentState state{Vec(dim, 0.0), Vec(dim, 0.0)};
  out.push_back(state.dot_x);
  for (int k = 0; k < k_max; ++k) {
    const double alpha = trace.alpha[static_cast<std::size_t>(k)];
    const double beta = trace.beta[static_cast<std::size_t>(k)];
    const Vec& y = trace.y[static_cast<std::size_t>(k)];
    const Vec& w = trace.w[static_cast<std::size_t>(k)];
    if (kink_hits) *kink_hits += problem.g.kink_rows(w, alpha);
    Vec dy = lincomb(1.0 + beta, state.dot_x, -beta, state.dot_x_prev);
    Vec dw = dy;
    axpy(dw, -alpha, problem.f.hvp(y, dy));
    axpy(dw, -alpha, problem.f.cross_jvp(y, du));
    state.dot_x_prev = std::move(state.dot_x);
    state.dot_x = problem.g.prox_jvp(w, alpha, dw, du.d_reg_weight);
    out.push_back(state.dot_x);
  }
  return out;
}

ParamDelta ad_reverse(const ProblemInstance& problem, const SolveTrace& trace, const Vec& xbar,
                      const std::function<void(int, const ParamDelta&)>& observer) {
  const int k_max = trace.iterations();
  if (k_max == 0 || trace.y.empty())
    throw std::invalid_argument("ad_reverse: trace was not recorded");
  if (static_cast<int>(xbar.size()) != problem.dim())
    throw std::invalid_argument("ad_reverse: xbar dimension mismatch");

  CotangentState state{xbar, Vec(xbar.size(), 0.0), ParamDelta::zeros_like(problem.u)};
  for (int n = 0; n < k_max; ++n) {
    const int k = k_max - 1 - n;
    const double alpha = trace.alpha[static_cast<std::size_t>(k)];
    const double beta = trace.beta[static_cast<std::size_t>(k)];
    const Vec& y = trace.y[static_cast<std::size_t>(k)];
    const Vec& w = trace.w[static_cast<std::size_t>(k)];

    Vec wbar = problem.g.prox_vjp_w(w, alpha, state.bar_x_next);
    state.bar_u.d_reg_weight += problem.g.prox_vjp_lambda(w, alpha, state.bar_x_next);
    Vec ybar = wbar;
    axpy(ybar, -alpha, problem.f.hvp(y, wbar));
    state.bar_u.add_scaled(problem.f.cross_vjp(y, wbar), -alpha);
    // x(k) feeds y(k) with weight (1+beta_k) and y(k+1) with weight
    // -beta_{k+1}; y-bar(K) is zero, so the missing beta_K never matters.
    const double beta_next = k + 1 < k_max ? trace.beta[static_cast<std::size_t>(k) + 1] : 0.0;
    Vec xbar_k = lincomb(1.0 + beta, ybar, -beta_next, state.bar_y_next);
    state.bar_y_next = std::move(ybar);
    state.bar_x_next = std::move(xbar_k);
    if (observer) observer(n + 1, state.bar_u);
  }
  return state.bar_u;
}

FpadForwardResult fpad_forward(const ProblemInstance& problem, const FpadAnchor& anchor,
                               const ParamDelta& du, int iters, double tol,
                               bool record_sequence) {
  return fpad_forward_core(frozen_ops(problem, anchor), du, iters, tol, record_sequence);
}

FpadReverseResult<ParamDelta> fpad_reverse(
    const ProblemInstance& problem, const FpadAnchor& anchor, const Vec& xbar, double tol,
    int max_iters, const std::function<void(int, const ParamDelta&, double)>& observer) {
  return fpad_reverse_core(frozen_ops(problem, anchor), xbar, tol, max_iters, observer);
}

ImplicitJvpResult implicit_diff_jvp(const ProblemInstance& problem, const FpadAnchor& anchor,
                                    const ParamDelta& du, double cg_tol, int max_iters) {
  return implicit_jvp_core(frozen_ops(problem, anchor), du, cg_tol, max_iters);
}

ImplicitVjpResult<ParamDelta> implicit_diff_vjp(const ProblemInstance& problem,
                                                const FpadAnchor& anchor, const Vec& xbar,
                                                double cg_tol, int max_iters) {
  return implicit_vjp_core(frozen_ops(problem, anchor), xbar, cg_tol, max_iters);
}

}  // namespace proxdiff
