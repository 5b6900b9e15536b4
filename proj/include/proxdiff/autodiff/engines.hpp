#ifndef PROXDIFF_AUTODIFF_ENGINES_HPP
#define PROXDIFF_AUTODIFF_ENGINES_HPP

#include <functional>
#include <vector>

#include "proxdiff/autodiff/fpad_core.hpp"
#include "proxdiff/problems/instance.hpp"
#include "proxdiff/solver/apg.hpp"

namespace proxdiff {

// Forward-mode state: the current and previous direction iterates, advanced
// in lockstep with the solver recursion; the parameter direction is held
// fixed outside.
struct TangentState {
  Vec dot_x;
  Vec dot_x_prev;
};

// Reverse-mode state: the cotangents flowing backwards plus the parameter
// accumulator, which only ever grows additively.
struct CotangentState {
  Vec bar_x_next;  // cotangent of x(k+1) while step k is processed
  Vec bar_y_next;  // cotangent of y(k+1)
  ParamDelta bar_u;
};

// Approximate fixed point plus everything the frozen-linearization engines
// evaluate there: the projected subgradient nu, the base point w = x + alpha
// nu of the shrinkage derivative, and the identified pattern.
struct FpadAnchor {
  Vec x;
  Vec nu;
  Vec w;
  double alpha = 0.0;
  double beta = 0.0;
  ActivePattern pattern;
};

FpadAnchor make_fpad_anchor(const ProblemInstance& problem, const Vec& x, double alpha,
                            double beta);

// Frozen step linearization at the anchor, for the generic recursions. The
// closures borrow `problem`, which must outlive the returned object.
FrozenOps<ParamDelta> frozen_ops(const ProblemInstance& problem, const FpadAnchor& anchor);

// Unrolled forward-mode derivative of the recorded solve: returns
// x-dot(0..K) for the parameter direction du. Base points sitting exactly on
// a shrinkage kink get the tie rule; when `kink_hits` is non-null the number
// of such rows across the sweep is reported there.
std::vector<Vec> ad_forward(const ProblemInstance& problem, const SolveTrace& trace,
                            const ParamDelta& du, int* kink_hits = nullptr);

// Unrolled reverse-mode derivative over the recorded tape: returns the
// accumulated parameter cotangent after sweeping all K steps. The observer,
// when set, sees the accumulator after each reverse step.
ParamDelta ad_reverse(const ProblemInstance& problem, const SolveTrace& trace, const Vec& xbar,
                      const std::function<void(int, const ParamDelta&)>& observer = {});

FpadForwardResult fpad_forward(const ProblemInstance& problem, const FpadAnchor& anchor,
                               const ParamDelta& du, int iters, double tol,
                               bool record_sequence = false);

FpadReverseResult<ParamDelta> fpad_reverse(
    const ProblemInstance& problem, const FpadAnchor& anchor, const Vec& xbar, double tol,
    int max_iters, const std::function<void(int, const ParamDelta&, double)>& observer = {});

// Direct solve of the linear fixed-point equation the frozen recursions
// iterate on: X = R X + S du (forward) or Xbar (I - R) = xbar (reverse).
ImplicitJvpResult implicit_diff_jvp(const ProblemInstance& problem, const FpadAnchor& anchor,
                                    const ParamDelta& du, double cg_tol = 1e-12,
                                    int max_iters = 20000);
ImplicitVjpResult<ParamDelta> implicit_diff_vjp(const ProblemInstance& problem,
                                                const FpadAnchor& anchor, const Vec& xbar,
                                                double cg_tol = 1e-12, int max_iters = 20000);

}  // namespace proxdiff

#endif
