#ifndef PROXDIFF_AUTODIFF_FPAD_CORE_HPP
#define PROXDIFF_AUTODIFF_FPAD_CORE_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "proxdiff/core/spectral.hpp"
#include "proxdiff/core/vec.hpp"

namespace proxdiff {

// Linearization of one solver step, frozen at an approximate fixed point.
// Everything the fixed-point derivative recursions need is expressed through
// these actions; Pack is the parameter (co)tangent type and must provide
// add_scaled(other, c) and a free dot().
template <class Pack>
struct FrozenOps {
  int dim = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::function<Vec(const Vec&)> prox_jvp;            // D_w prox at the frozen base
  std::function<Vec(const Vec&)> prox_vjp;            // its transpose
  std::function<Vec(const Vec&)> hvp;                 // Hessian of f at the anchor
  std::function<Vec(const Pack&)> prox_pack_jvp;      // D_u prox (may be empty)
  std::function<void(const Vec&, Pack&, double)> prox_pack_vjp_acc;  // acc += c * vbar D_u prox
  std::function<Vec(const Pack&)> cross_jvp;          // D_u grad f at the anchor
  std::function<void(const Vec&, Pack&, double)> cross_vjp_acc;      // acc += c * vbar D_u grad f
  std::function<Pack()> pack_zero;
  std::function<std::size_t(const Pack&)> pack_bytes;  // retained-state accounting

  // v -> D_w prox ((I - alpha hvp) v): the frozen derivative of one plain
  // proximal-gradient step with respect to the primal point.
  Vec step_jvp(const Vec& v) const {
    Vec t = v;
    axpy(t, -alpha, hvp(v));
    return prox_jvp(t);
  }
  Vec step_vjp(const Vec& v) const {
    Vec t = prox_vjp(v);
    Vec out = t;
    axpy(out, -alpha, hvp(t));
    return out;
  }
  // u-pathway of one step: D_w prox (-alpha D_u grad f du) + D_u prox du.
  Vec step_pack_jvp(const Pack& du) const {
    Vec t = scaled(cross_jvp(du), -alpha);
    Vec out = prox_jvp(t);
    if (prox_pack_jvp) axpy(out, 1.0, prox_pack_jvp(du));
    return out;
  }
  void step_pack_vjp_acc(const Vec& vbar, Pack& acc, double c) const {
    if (prox_pack_vjp_acc) prox_pack_vjp_acc(vbar, acc, c);
    cross_vjp_acc(prox_vjp(vbar), acc, -alpha * c);
  }
};

struct FpadForwardResult {
  std::vector<Vec> seq;  // x-hat(0..iters) when recorded
  Vec limit;
  bool converged = false;
  double last_step = 0.0;
  int iters = 0;
};

// Forward fixed-point derivative recursion with momentum. Stops once the
// geometric tail bound step * g/(1-g), with g the windowed step contraction,
// falls below tol (absolute); tol <= 0 runs all `iters` iterations.
template <class Pack>
FpadForwardResult fpad_forward_core(const FrozenOps<Pack>& ops, const Pack& du, int iters,
                                    double tol, bool record_sequence) {
  FpadForwardResult result;
  Vec xh(static_cast<std::size_t>(ops.dim), 0.0);
  Vec xh_prev = xh;
  if (record_sequence) result.seq.push_back(xh);

  const Vec forced_w = scaled(ops.cross_jvp(du), -ops.alpha);
  Vec forced_x(static_cast<std::size_t>(ops.dim), 0.0);
  if (ops.prox_pack_jvp) forced_x = ops.prox_pack_jvp(du);

  const int window = 8;
  std::vector<double> steps;
  steps.reserve(static_cast<std::size_t>(iters > 0 ? iters : 0));
  for (int k = 0; k < iters; ++k) {
    Vec yh = lincomb(1.0 + ops.beta, xh, -ops.beta, xh_prev);
    Vec wh = yh;
    axpy(wh, -ops.alpha, ops.hvp(yh));
    axpy(wh, 1.0, forced_w);
    Vec xh_next = ops.prox_jvp(wh);
    axpy(xh_next, 1.0, forced_x);

    xh_prev = std::move(xh);
    xh = std::move(xh_next);
    result.iters = k + 1;
    if (record_sequence) result.seq.push_back(xh);

    const double step = norm2(sub(xh, xh_prev));
    steps.push_back(step);
    result.last_step = step;
    if (tol > 0.0 && static_cast<int>(steps.size()) > window) {
      const double prev = steps[steps.size() - 1 - window];
      if (step == 0.0) {
        result.converged = true;
        break;
      }
      if (prev > 0.0) {
        const double g = std::pow(step / prev, 1.0 / window);
        if (g < 1.0 && step * g / (1.0 - g) <= tol) {
          result.converged = true;
          break;
        }
      }
    }
  }
  result.limit = xh;
  return result;
}

template <class Pack>
struct FpadReverseResult {
  Pack u_tilde;
  bool converged = false;
  double tilde_norm = 0.0;  // ||x-tilde|| at exit
  int iters = 0;
  std::size_t peak_state_bytes = 0;
};

// Reverse fixed-point derivative recursion; runs until ||x-tilde|| < tol or
// max_iters. Retained state is two primal-sized vectors plus the parameter
// accumulator, independent of the iteration count.
template <class Pack>
FpadReverseResult<Pack> fpad_reverse_core(
    const FrozenOps<Pack>& ops, const Vec& xbar, double tol, int max_iters,
    const std::function<void(int, const Pack&, double)>& observer = {}) {
  FpadReverseResult<Pack> result;
  Vec xt_next = xbar;                                   // x-tilde at position k+1
  Vec yt_next(static_cast<std::size_t>(ops.dim), 0.0);  // y-tilde at position k+1
  result.u_tilde = ops.pack_zero();

  for (int n = 0; n < max_iters; ++n) {
    Vec wt = ops.prox_vjp(xt_next);
    Vec yt = wt;
    axpy(yt, -ops.alpha, ops.hvp(wt));
    if (ops.prox_pack_vjp_acc) ops.prox_pack_vjp_acc(xt_next, result.u_tilde, 1.0);
    ops.cross_vjp_acc(wt, result.u_tilde, -ops.alpha);
    Vec xt = lincomb(1.0 + ops.beta, yt, -ops.beta, yt_next);

    std::size_t live = (xt.size() + yt.size() + wt.size() + xt_next.size() + yt_next.size()) *
                       sizeof(double);
    if (ops.pack_bytes) live += ops.pack_bytes(result.u_tilde);
    result.peak_state_bytes = std::max(result.peak_state_bytes, live);

    yt_next = std::move(yt);
    xt_next = std::move(xt);
    result.iters = n + 1;
    result.tilde_norm = norm2(xt_next);
    if (observer) observer(n + 1, result.u_tilde, result.tilde_norm);
    if (tol > 0.0 && result.tilde_norm < tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

enum class LinearSolveMethod { kNeumann, kCgNormal };

struct ImplicitJvpResult {
  Vec x;
  LinearSolveMethod method = LinearSolveMethod::kNeumann;
  bool converged = false;
  int iters = 0;
  double contraction_estimate = 0.0;
};

template <class Pack>
struct ImplicitVjpResult {
  Pack u_bar;
  LinearSolveMethod method = LinearSolveMethod::kNeumann;
  bool converged = false;
  int iters = 0;
  double contraction_estimate = 0.0;
};

namespace detail {

// Estimate of the contraction factor of `apply` restricted to its invariant
// subspace; cheap and deterministic.
inline double contraction_estimate(const std::function<Vec(const Vec&)>& apply, int dim) {
  SpectralEstimate est = spectral_radius_estimate(apply, dim, 1e-6, 400);
  return est.value;
}

// Solves (I - T) x = b where T is a (near-)contraction: Neumann summation
// when the contraction estimate allows, conjugate gradient on the normal
// equations otherwise.
ImplicitJvpResult solve_linear_fixed_point(const std::function<Vec(const Vec&)>& t_apply,
                                           const std::function<Vec(const Vec&)>& t_apply_t,
                                           const Vec& b, double tol, int max_iters, double rho);

}  // namespace detail

template <class Pack>
ImplicitJvpResult implicit_jvp_core(const FrozenOps<Pack>& ops, const Pack& du, double cg_tol,
                                    int max_iters) {
  const Vec rhs = ops.step_pack_jvp(du);
  auto r_apply = [&ops](const Vec& v) { return ops.step_jvp(v); };
  auto r_apply_t = [&ops](const Vec& v) { return ops.step_vjp(v); };
  const double rho = detail::contraction_estimate(r_apply, ops.dim);
  return detail::solve_linear_fixed_point(r_apply, r_apply_t, rhs, cg_tol, max_iters, rho);
}

template <class Pack>
ImplicitVjpResult<Pack> implicit_vjp_core(const FrozenOps<Pack>& ops, const Vec& xbar,
                                          double cg_tol, int max_iters) {
  auto r_apply_t = [&ops](const Vec& v) { return ops.step_vjp(v); };
  auto r_apply = [&ops](const Vec& v) { return ops.step_jvp(v); };
  const double rho = detail::contraction_estimate(r_apply_t, ops.dim);
  ImplicitJvpResult lin =
      detail::solve_linear_fixed_point(r_apply_t, r_apply, xbar, cg_tol, max_iters, rho);
  ImplicitVjpResult<Pack> result;
  result.method = lin.method;
  result.converged = lin.converged;
  result.iters = lin.iters;
  result.contraction_estimate = lin.contraction_estimate;
  result.u_bar = ops.pack_zero();
  ops.step_pack_vjp_acc(lin.x, result.u_bar, 1.0);
  return result;
}

}  // namespace proxdiff

#endif
