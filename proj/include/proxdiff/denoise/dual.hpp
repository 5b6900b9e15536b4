#ifndef PROXDIFF_DENOISE_DUAL_HPP
#define PROXDIFF_DENOISE_DUAL_HPP

#include <vector>

#include "proxdiff/denoise/filter_bank.hpp"

namespace proxdiff::denoise {

// The dual variable of the denoising problem is a per-pixel stack of
// (channel, filter) responses.
using DualVariable = Field;

// Per-pixel Euclidean ball of radius 1 over the joint (channel, filter)
// vector: the feasible set of the dual variable. Rescales infeasible pixels
// radially; idempotent.
void dual_project(Field& p);

// Frozen data for the reverse derivative of the dual iteration: the final
// dual point, the per-pixel active mask of the ball constraint, the outward
// multipliers nu, and the base point w = p + alpha nu of the projection
// derivative. A pixel exactly on the boundary counts as active.
struct DualAnchor {
  Field p;
  Field nu;
  Field w;
  std::vector<bool> active;  // per pixel (x, y)
  double alpha = 0.0;
  double beta = 0.0;
  int boundary_exact = 0;  // pixels with zero outward multiplier on the boundary
};

struct DualSolveOptions {
  int iters = 500;
  double q = 5.0;
  bool momentum = true;
  bool record_objectives = false;
};

struct DenoiseResult {
  Image denoised;  // noisy - adjoint(p)
  Field dual;
  DualAnchor anchor;
  double alpha = 0.0;
  std::vector<double> objectives;  // dual objective per iteration, when recorded
};

// Solves min_p 1/2 || noisy - adjoint(p) ||^2 over the per-pixel unit balls
// by projected accelerated proximal gradient, starting from p(0) = A(noisy),
// with constant step 1 / op_norm_bound_sq. A bank with zero operator norm
// leaves the image untouched.
DenoiseResult denoise_dual_apg(const FilterBank& bank, const Image& noisy,
                               const DualSolveOptions& options);

// Projection derivative at the anchor base point, applied pixelwise:
// identity on inactive pixels, the scaled tangential projector on active
// ones. Self-adjoint, so it serves as both the forward and transpose action.
Field projection_jvp(const DualAnchor& anchor, const Field& v);

}  // namespace proxdiff::denoise

#endif
