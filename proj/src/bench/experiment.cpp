#include "proxdiff/bench/experiment.hpp"

#include <cmath>
#include <sstream>

#include "proxdiff/autodiff/engines.hpp"
#include "proxdiff/core/rng.hpp"
#include "proxdiff/core/spectral.hpp"
#include "proxdiff/oracle/reduced.hpp"
#include "proxdiff/solver/apg.hpp"

namespace proxdiff {

const std::array<const char*, ErrorCurves::kCount> ErrorCurves::kNames = {
    "pgd_x",        "apg_x",        "pgd_fwd_ad",   "apg_fwd_ad",   "pgd_rev_ad",
    "apg_rev_ad",   "pgd_fwd_fpad", "apg_fwd_fpad", "pgd_rev_fpad", "apg_rev_fpad"};

namespace {

constexpr double kReferenceResidual = 1e-12;
constexpr double kRequiredMargin = 0.02;

double max_dual_row_magnitude(const DenseMatrix& a, const DenseMatrix& b) {
  const Vec atb = a.apply_transpose_block(b.entries(), b.cols());
  const int l = b.cols();
  double best = 0.0;
  for (int r = 0; r < a.cols(); ++r) {
    double s = 0.0;
    for (int c = 0; c < l; ++c) {
      const double v = atb[static_cast<std::size_t>(r) * l + c];
      s += v * v;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

SolveResult reference_solve(const ProblemInstance& problem, double q) {
  SolverConfig cfg;
  cfg.momentum = MomentumRule::nesterov(q);
  cfg.max_iters = 200000;
  cfg.fp_residual_tol = kReferenceResidual;
  SolveResult accel = apg_solve(problem, Vec(static_cast<std::size_t>(problem.dim()), 0.0), cfg);
  if (accel.hit_tolerance) return accel;
  // The extrapolated solver's residual oscillates near tight tolerances on
  // large instances; polish with the plain method, whose residual decreases
  // monotonically.
  SolverConfig polish;
  polish.max_iters = 400000;
  polish.fp_residual_tol = kReferenceResidual;
  SolveResult out = apg_solve(problem, accel.x, polish);
  out.iters += accel.iters;
  return out;
}

}  // namespace

GeneratedInstance generate_instance(const ExperimentSpec& spec) {
  if (spec.m <= 0 || spec.n <= 0 || spec.l <= 0)
    throw std::invalid_argument("generate_instance: dimensions must be positive");
  const int l = spec.problem == ExperimentSpec::Problem::kLasso ? 1 : spec.l;

  Rng matrix_rng(spec.seed, RngStream::kMatrix);
  DenseMatrix a(spec.m, spec.n, matrix_rng.uniform_vec(static_cast<std::size_t>(spec.m) * spec.n,
                                                       0.0, 1.0));
  Rng target_rng(spec.seed, RngStream::kTarget);
  DenseMatrix b(spec.m, l, target_rng.normal_vec(static_cast<std::size_t>(spec.m) * l));

  // The shifted power iteration resolves the smallest Gram eigenvalue only
  // relative to the largest, so the full-rank gate is relative as well.
  const DenseMatrix gram = a.gram();
  const double min_eig = symmetric_min_eigenvalue(gram);
  const double top_eig = spectral_radius(gram);
  const double sigma_min = std::sqrt(std::max(min_eig, 0.0));
  if (!(sigma_min > 1e-8) || !(min_eig > 1e-10 * top_eig)) {
    std::ostringstream msg;
    msg << "generate_instance: design matrix is rank deficient (sigma_min = " << sigma_min << ")";
    throw DegenerateInstanceError(msg.str());
  }

  // An explicitly requested weight only has to be strictly nondegenerate;
  // the automatic rule additionally demands the working margin.
  const bool fixed_lambda = spec.lambda > 0.0;
  double lambda = fixed_lambda ? spec.lambda : 0.1 * max_dual_row_magnitude(a, b);
  const int max_retries = fixed_lambda ? 1 : 10;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    ProblemInstance problem = make_group_lasso_instance(ParamPack(a, b, lambda));
    SolveResult solved = reference_solve(problem, spec.q);
    if (!solved.hit_tolerance) {
      lambda *= 1.5;
      continue;
    }
    const NondegeneracyReport nd = check_nondegeneracy(problem, solved.x, kRequiredMargin);
    const bool margin_ok = fixed_lambda ? nd.min_gap > 0.0 : nd.ok;
    const bool support_nonempty = problem.g.pattern(solved.x).active_rows() > 0;
    if (margin_ok && support_nonempty) {
      GeneratedInstance out{std::move(problem), std::move(solved.x), lambda, nd.min_gap, attempt,
                            sigma_min};
      return out;
    }
    lambda *= 1.5;
  }
  std::ostringstream msg;
  msg << "generate_instance: no nondegenerate instance with nonempty support after "
      << max_retries << " weight retries (seed " << spec.seed << ")";
  throw DegenerateInstanceError(msg.str());
}

ErrorCurves run_error_curves(const ExperimentSpec& spec) {
  GeneratedInstance gen = generate_instance(spec);
  const ProblemInstance& problem = gen.problem;
  const int dim = problem.dim();
  const int k_iters = spec.iters;

  const ParamDelta du = ParamDelta::lambda_direction(problem.u);
  Rng xbar_rng(spec.seed, RngStream::kDirectionXbar);
  const Vec xbar = xbar_rng.normal_vec(static_cast<std::size_t>(dim));

  // Reference derivatives from the reduced tangent system.
  const ReducedSystem sys = build_reduced_system(problem, gen.x_star, du);
  const Vec dx_star = solve_dpsi_jvp(sys);
  const ParamDelta ubar_star = solve_dpsi_vjp(problem, gen.x_star, xbar);

  ErrorCurves out;
  out.iters = k_iters;
  for (auto& c : out.curves) c.assign(static_cast<std::size_t>(k_iters) + 1, 0.0);

  const Vec x0(static_cast<std::size_t>(dim), 0.0);
  for (int accel = 0; accel < 2; ++accel) {
    SolverConfig cfg;
    cfg.momentum = accel ? MomentumRule::nesterov(spec.q) : MomentumRule::zero();
    cfg.max_iters = k_iters;
    cfg.fp_residual_tol = 0.0;  // fixed iteration count for derivative runs
    cfg.record_trace = true;
    SolveResult run = apg_solve(problem, x0, cfg);
    const SolveTrace& trace = run.trace;

    auto& iterate_curve = out.curves[static_cast<std::size_t>(accel)];          // *_x
    auto& fwd_ad_curve = out.curves[static_cast<std::size_t>(2 + accel)];       // *_fwd_ad
    auto& rev_ad_curve = out.curves[static_cast<std::size_t>(4 + accel)];       // *_rev_ad
    auto& fwd_fpad_curve = out.curves[static_cast<std::size_t>(6 + accel)];     // *_fwd_fpad
    auto& rev_fpad_curve = out.curves[static_cast<std::size_t>(8 + accel)];     // *_rev_fpad

    for (int k = 0; k <= k_iters; ++k)
      iterate_curve[static_cast<std::size_t>(k)] =
          norm2(sub(trace.x[static_cast<std::size_t>(k)], gen.x_star));

    const std::vector<Vec> fwd = ad_forward(problem, trace, du);
    for (int k = 0; k <= k_iters; ++k)
      fwd_ad_curve[static_cast<std::size_t>(k)] =
          norm2(sub(fwd[static_cast<std::size_t>(k)], dx_star));

    rev_ad_curve[0] = norm2(ubar_star);
    ad_reverse(problem, trace, xbar, [&](int n, const ParamDelta& ubar) {
      rev_ad_curve[static_cast<std::size_t>(n)] = norm2(sub(ubar, ubar_star));
    });

    // Frozen-linearization runs anchored at the solver's own final iterate;
    // the accelerated variant freezes the final momentum value.
    const double beta_anchor = accel ? trace.beta.back() : 0.0;
    const FpadAnchor anchor = make_fpad_anchor(problem, run.x, run.alpha, beta_anchor);

    const FpadForwardResult ffwd = fpad_forward(problem, anchor, du, k_iters, 0.0, true);
    for (int k = 0; k <= k_iters; ++k)
      fwd_fpad_curve[static_cast<std::size_t>(k)] =
          norm2(sub(ffwd.seq[static_cast<std::size_t>(k)], dx_star));

    rev_fpad_curve[0] = norm2(ubar_star);
    fpad_reverse(problem, anchor, xbar, 0.0, k_iters,
                 [&](int n, const ParamDelta& ut, double) {
                   rev_fpad_curve[static_cast<std::size_t>(n)] = norm2(sub(ut, ubar_star));
                 });
  }
  return out;
}

std::vector<RateReport> rate_table(const ErrorCurves& curves, double floor) {
  std::vector<RateReport> out;
  out.reserve(ErrorCurves::kCount);
  for (const auto& c : curves.curves) out.push_back(fit_linear_rate(c, floor));
  return out;
}

}  // namespace proxdiff
