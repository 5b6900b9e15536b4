#ifndef PROXDIFF_SOLVER_APG_HPP
#define PROXDIFF_SOLVER_APG_HPP

#include <cstddef>
#include <vector>

#include "proxdiff/problems/instance.hpp"

namespace proxdiff {

// beta_k = (k-1)/(k+q), clamped to [0, 1]. Requires q > 2.
double nesterov_beta(int k, double q);

struct MomentumRule {
  enum class Kind { kZero, kNesterov, kConstant };
  Kind kind = Kind::kZero;
  double q = 5.0;     // for kNesterov
  double beta = 0.0;  // for kConstant

  static MomentumRule zero() { return {Kind::kZero, 0.0, 0.0}; }
  static MomentumRule nesterov(double q) { return {Kind::kNesterov, q, 0.0}; }
  static MomentumRule constant(double beta) { return {Kind::kConstant, 0.0, beta}; }

  double at(int k) const;
};

struct SolverConfig {
  double alpha = 0.0;                // constant step; <= 0 selects 1/L
  std::vector<double> alpha_sequence;  // overrides `alpha` when nonempty
  MomentumRule momentum = MomentumRule::zero();
  int max_iters = 1000;
  double fp_residual_tol = 0.0;  // 0 disables early stopping
  bool record_trace = false;

  double step_at(int k, double fallback) const {
    if (!alpha_sequence.empty())
      return alpha_sequence[std::min<std::size_t>(k, alpha_sequence.size() - 1)];
    return alpha > 0.0 ? alpha : fallback;
  }
};

// Per-iteration record of a solve; also serves as the reverse-mode tape. The
// stored w(k) and y(k) are enough to rebuild every local derivative action
// without materializing Jacobians.
struct SolveTrace {
  std::vector<Vec> x;         // 0..K
  std::vector<Vec> y;         // 0..K-1
  std::vector<Vec> w;         // 0..K-1
  std::vector<double> alpha;  // 0..K-1
  std::vector<double> beta;   // 0..K-1
  std::vector<double> residual;  // 0..K, fixed-point residual at x(k)

  int iterations() const { return static_cast<int>(w.size()); }
  std::size_t retained_bytes() const;
};

struct SolveResult {
  Vec x;
  SolveTrace trace;  // populated only when cfg.record_trace
  int iters = 0;
  bool hit_tolerance = false;
  double final_residual = 0.0;
  double final_beta = 0.0;
  double alpha = 0.0;  // constant step actually used (last step if a sequence)
};

// ||x - prox_{alpha g}(x - alpha grad f(x))||_2.
double fixed_point_residual(const ProblemInstance& problem, const Vec& x, double alpha);

// Accelerated proximal gradient with extrapolation y(k) = (1+b_k) x(k) -
// b_k x(k-1); the zero momentum rule is plain proximal gradient descent.
// x(-1) is initialized to x(0). Throws on alpha outside (0, 2/L) and on
// objective blow-up beyond 1e6 x the initial value.
SolveResult apg_solve(const ProblemInstance& problem, const Vec& x0, const SolverConfig& cfg);

}  // namespace proxdiff

#endif
