#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "proxdiff/autodiff/engines.hpp"
#include "proxdiff/bench/experiment.hpp"
#include "proxdiff/core/rng.hpp"
#include "proxdiff/oracle/reduced.hpp"
#include "support/test_oracles.hpp"

using namespace proxdiff;

namespace {

GeneratedInstance desk_lasso(uint64_t seed) {
  ExperimentSpec spec;
  spec.problem = ExperimentSpec::Problem::kLasso;
  spec.m = 100;
  spec.n = 25;
  spec.seed = seed;
  return generate_instance(spec);
}

GeneratedInstance desk_group(uint64_t seed) {
  ExperimentSpec spec;
  spec.problem = ExperimentSpec::Problem::kGroupLasso;
  spec.m = 100;
  spec.n = 10;
  spec.l = 8;
  spec.seed = seed;
  return generate_instance(spec);
}

SolveResult traced_solve(const ProblemInstance& p, int iters, bool accelerated) {
  SolverConfig cfg;
  cfg.max_iters = iters;
  cfg.record_trace = true;
  if (accelerated) cfg.momentum = MomentumRule::nesterov(5.0);
  return apg_solve(p, Vec(static_cast<std::size_t>(p.dim()), 0.0), cfg);
}

ParamDelta random_delta(const ParamPack& u, uint64_t seed) {
  Rng rng(seed, RngStream::kDirectionU);
  ParamDelta d = ParamDelta::zeros_like(u);
  d.d_design = DenseMatrix(u.design.rows(), u.design.cols(),
                           rng.normal_vec(u.design.entries().size()));
  d.d_target = DenseMatrix(u.target.rows(), u.target.cols(),
                           rng.normal_vec(u.target.entries().size()));
  d.d_reg_weight = rng.normal();
  return d;
}

}  // namespace

TEST_CASE("forward derivative of the identity solution map converges to one") {
  // f = 1/2 (x - b)^2: the solution map is b itself.
  ProblemInstance p = make_smooth_instance(
      ParamPack(DenseMatrix::identity(1), DenseMatrix(1, 1, Vec{0.7}), 1.0));
  SolverConfig cfg;
  cfg.alpha = 0.9;
  cfg.max_iters = 40;
  cfg.record_trace = true;
  SolveResult res = apg_solve(p, Vec{0.0}, cfg);
  ParamDelta du = ParamDelta::zeros_like(p.u);
  du.d_target.at(0, 0) = 1.0;
  std::vector<Vec> fwd = ad_forward(p, res.trace, du);
  CHECK(std::abs(fwd.back()[0] - 1.0) < 1e-12);
}

TEST_CASE("zero parameter direction gives identically zero derivatives") {
  GeneratedInstance gen = desk_lasso(1);
  SolveResult run = traced_solve(gen.problem, 60, true);
  std::vector<Vec> fwd = ad_forward(gen.problem, run.trace, ParamDelta::zeros_like(gen.problem.u));
  for (const Vec& v : fwd) CHECK(norm2(v) == 0.0);
}

TEST_CASE("one-step reverse sweep matches the hand-computed chain") {
  // Single step, smooth problem: the target cotangent is alpha * xbar
  // (through the gradient's dependence on b) scaled by the shrink-free prox.
  const double alpha = 0.8;
  ProblemInstance p = make_smooth_instance(
      ParamPack(DenseMatrix::identity(1), DenseMatrix(1, 1, Vec{0.3}), 1.0));
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.max_iters = 1;
  cfg.record_trace = true;
  SolveResult res = apg_solve(p, Vec{2.0}, cfg);
  ParamDelta ubar = ad_reverse(p, res.trace, Vec{1.5});
  CHECK(ubar.d_target.at(0, 0) == doctest::Approx(alpha * 1.5).epsilon(1e-14));
  // Design-matrix pathway, same single step: d/dA of A^T(Ax - b) at A = 1.
  // grad = A(Ax-b) pathway derivative: dA*(x0... checked via adjoint identity below.
}

TEST_CASE("adjoint identity between unrolled forward and reverse is exact") {
  GeneratedInstance gen = desk_lasso(2);
  SolveResult run = traced_solve(gen.problem, 47, true);
  Rng rng(99);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(gen.problem.dim()));
  const ParamDelta du = random_delta(gen.problem.u, 3);

  std::vector<Vec> fwd = ad_forward(gen.problem, run.trace, du);
  ParamDelta ubar = ad_reverse(gen.problem, run.trace, xbar);
  const double lhs = dot(ubar, du);
  const double rhs = dot(xbar, fwd.back());
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
}

TEST_CASE("unrolled engines approach the reduced-system reference on a desk instance") {
  GeneratedInstance gen = desk_lasso(4);
  const ProblemInstance& p = gen.problem;
  SolveResult run = traced_solve(p, 3500, true);

  const ParamDelta du = ParamDelta::lambda_direction(p.u);
  const Vec dx_star = solve_dpsi_jvp(build_reduced_system(p, gen.x_star, du));
  std::vector<Vec> fwd = ad_forward(p, run.trace, du);
  CHECK(testsupport::rel_err(fwd.back(), dx_star) < 1e-6);

  Rng rng(5);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));
  const ParamDelta ubar_star = solve_dpsi_vjp(p, gen.x_star, xbar);
  ParamDelta ubar = ad_reverse(p, run.trace, xbar);
  CHECK(norm2(sub(ubar, ubar_star)) / norm2(ubar_star) < 1e-5);
}

TEST_CASE("anchor: projected subgradient membership and recomputable base point") {
  GeneratedInstance gen = desk_lasso(6);
  const ProblemInstance& p = gen.problem;
  FpadAnchor anchor = make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, 0.5);
  CHECK(p.g.subgrad_contains(gen.x_star, anchor.nu, 1e-9));
  Vec w = anchor.x;
  axpy(w, anchor.alpha, anchor.nu);
  CHECK(norm2(sub(w, anchor.w)) == 0.0);
}

TEST_CASE("frozen forward recursion: scalar case recovers the classic implicit derivative") {
  // f = 1/2 (a x - b)^2 with a = 2: the solution is b / a and its derivative
  // in b is 1/a.
  ProblemInstance p = make_smooth_instance(
      ParamPack(DenseMatrix(1, 1, Vec{2.0}), DenseMatrix(1, 1, Vec{1.2}), 1.0));
  const Vec x_star{0.6};
  FpadAnchor anchor = make_fpad_anchor(p, x_star, 1.0 / p.f.lipschitz, 0.0);
  ParamDelta du = ParamDelta::zeros_like(p.u);
  du.d_target.at(0, 0) = 1.0;
  FpadForwardResult fwd = fpad_forward(p, anchor, du, 2000, 1e-14);
  CHECK(fwd.converged);
  CHECK(std::abs(fwd.limit[0] - 0.5) < 1e-12);

  // Reverse mode on the same anchor: ubar_b = xbar / a.
  FpadReverseResult<ParamDelta> rev = fpad_reverse(p, anchor, Vec{1.0}, 1e-14, 2000);
  CHECK(rev.converged);
  CHECK(std::abs(rev.u_tilde.d_target.at(0, 0) - 0.5) < 1e-12);
}

TEST_CASE("frozen forward iterates stay inside the anchor tangent space") {
  GeneratedInstance gen = desk_lasso(7);
  const ProblemInstance& p = gen.problem;
  FpadAnchor anchor =
      make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, nesterov_beta(1999, 5.0));
  const ParamDelta du = ParamDelta::lambda_direction(p.u);
  FpadForwardResult fwd = fpad_forward(p, anchor, du, 300, 0.0, true);
  REQUIRE(anchor.pattern.dim_tangent() > 0);
  for (std::size_t k = 1; k < fwd.seq.size(); ++k) {
    for (int r = 0; r < p.var_rows(); ++r) {
      if (anchor.pattern.mask[static_cast<std::size_t>(r)]) continue;
      CHECK(fwd.seq[k][static_cast<std::size_t>(r)] == 0.0);
    }
  }
}

TEST_CASE("frozen forward/reverse pair satisfies the adjoint identity") {
  GeneratedInstance gen = desk_lasso(8);
  const ProblemInstance& p = gen.problem;
  FpadAnchor anchor = make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, 0.6);
  const int iters = 137;
  const ParamDelta du = random_delta(p.u, 9);
  Rng rng(10);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));

  FpadForwardResult fwd = fpad_forward(p, anchor, du, iters, 0.0);
  FpadReverseResult<ParamDelta> rev = fpad_reverse(p, anchor, xbar, 0.0, iters);
  const double lhs = dot(rev.u_tilde, du);
  const double rhs = dot(xbar, fwd.limit);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(rhs) + 1.0));
}

TEST_CASE("frozen limits match the direct linear solve of the step equation") {
  GeneratedInstance gen = desk_lasso(11);
  const ProblemInstance& p = gen.problem;
  FpadAnchor anchor =
      make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, nesterov_beta(1999, 5.0));
  const ParamDelta du = ParamDelta::lambda_direction(p.u);

  FpadForwardResult fwd = fpad_forward(p, anchor, du, 60000, 1e-13);
  REQUIRE(fwd.converged);
  ImplicitJvpResult imp = implicit_diff_jvp(p, anchor, du);
  REQUIRE(imp.converged);
  CHECK(norm2(sub(fwd.limit, imp.x)) / norm2(imp.x) < 1e-10);

  // The zero direction solves to zero.
  ImplicitJvpResult zero = implicit_diff_jvp(p, anchor, ParamDelta::zeros_like(p.u));
  CHECK(norm2(zero.x) == 0.0);
}

TEST_CASE("implicit solve on a smooth quadratic matches a dense factorization") {
  Rng rng(12);
  const int m = 12, n = 6;
  DenseMatrix a(m, n, rng.uniform_vec(static_cast<std::size_t>(m) * n, 0.0, 1.0));
  DenseMatrix b(m, 1, rng.normal_vec(m));
  ProblemInstance p = make_smooth_instance(ParamPack(a, b, 1.0));
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.fp_residual_tol = 1e-13;
  cfg.momentum = MomentumRule::nesterov(5.0);
  SolveResult res = apg_solve(p, Vec(n, 0.0), cfg);
  REQUIRE(res.hit_tolerance);

  FpadAnchor anchor = make_fpad_anchor(p, res.x, 1.0 / p.f.lipschitz, 0.0);
  ParamDelta du = random_delta(p.u, 13);
  du.d_reg_weight = 0.0;  // no regularizer here, so no weight pathway
  ImplicitJvpResult imp = implicit_diff_jvp(p, anchor, du);
  REQUIRE(imp.converged);

  // Reference: (A^T A) X = -cross_jvp(du) by dense elimination.
  Vec rhs = p.f.cross_jvp(res.x, du);
  scale(rhs, -1.0);
  Vec want = testsupport::dense_solve(a.gram(), rhs);
  CHECK(testsupport::rel_err(imp.x, want) < 1e-9);
}

TEST_CASE("implicit reverse solve pairs with the forward solve") {
  GeneratedInstance gen = desk_group(14);
  const ProblemInstance& p = gen.problem;
  FpadAnchor anchor = make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, 0.0);
  const ParamDelta du = random_delta(p.u, 15);
  Rng rng(16);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));
  ImplicitJvpResult jvp = implicit_diff_jvp(p, anchor, du);
  ImplicitVjpResult<ParamDelta> vjp = implicit_diff_vjp(p, anchor, xbar);
  REQUIRE(jvp.converged);
  REQUIRE(vjp.converged);
  const double lhs = dot(vjp.u_bar, du);
  const double rhs = dot(xbar, jvp.x);
  CHECK(std::abs(lhs - rhs) <= 1e-9 * (std::abs(lhs) + std::abs(rhs) + 1.0));
}

TEST_CASE("frozen reverse matches the reference on the shared-support problem") {
  GeneratedInstance gen = desk_group(17);
  const ProblemInstance& p = gen.problem;
  REQUIRE(fixed_point_residual(p, gen.x_star, 1.0 / p.f.lipschitz) < 1e-11);
  FpadAnchor anchor =
      make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, nesterov_beta(799, 5.0));
  Rng rng(18);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));
  FpadReverseResult<ParamDelta> rev = fpad_reverse(p, anchor, xbar, 1e-13, 100000);
  REQUIRE(rev.converged);
  const ParamDelta want = solve_dpsi_vjp(p, gen.x_star, xbar);
  CHECK(norm2(sub(rev.u_tilde, want)) / norm2(want) < 1e-6);
}

TEST_CASE("coarser anchors give larger derivative errors") {
  GeneratedInstance gen = desk_lasso(19);
  const ProblemInstance& p = gen.problem;
  const ParamDelta du = ParamDelta::lambda_direction(p.u);
  const Vec dx_star = solve_dpsi_jvp(build_reduced_system(p, gen.x_star, du));

  // Plain proximal-gradient anchors: slow enough that none of the three
  // saturates at the reference's own accuracy floor.
  std::vector<double> errs;
  for (int iters : {10, 100, 1000}) {
    SolverConfig cfg;
    cfg.max_iters = iters;
    SolveResult run = apg_solve(p, Vec(static_cast<std::size_t>(p.dim()), 0.0), cfg);
    FpadAnchor anchor = make_fpad_anchor(p, run.x, run.alpha, 0.0);
    FpadForwardResult fwd = fpad_forward(p, anchor, du, 200000, 1e-13);
    errs.push_back(norm2(sub(fwd.limit, dx_star)));
  }
  CHECK(errs[0] > errs[1]);
  CHECK(errs[1] > errs[2]);
}

TEST_CASE("implicit solve records its method and falls back to the normal equations") {
  GeneratedInstance gen = desk_lasso(20);
  const ProblemInstance& p = gen.problem;
  FpadAnchor good = make_fpad_anchor(p, gen.x_star, 1.0 / p.f.lipschitz, 0.0);
  ImplicitJvpResult neumann = implicit_diff_jvp(p, good, ParamDelta::lambda_direction(p.u));
  CHECK(neumann.method == LinearSolveMethod::kNeumann);

  // A vanishing step pushes the step operator's spectral radius to 1 and the
  // solver onto the conjugate-gradient route.
  FpadAnchor stiff = make_fpad_anchor(p, gen.x_star, 1e-7 / p.f.lipschitz, 0.0);
  ImplicitJvpResult cg = implicit_diff_jvp(p, stiff, ParamDelta::lambda_direction(p.u), 1e-12,
                                           200000);
  CHECK(cg.method == LinearSolveMethod::kCgNormal);
  // Both anchors sit at the same point, so both solves target the same
  // derivative value.
  REQUIRE(cg.converged);
  CHECK(testsupport::rel_err(cg.x, neumann.x) < 1e-6);
}

TEST_CASE("reverse state stays flat while the tape grows with the horizon") {
  GeneratedInstance gen = desk_lasso(21);
  const ProblemInstance& p = gen.problem;
  std::vector<std::size_t> tape_bytes;
  std::vector<std::size_t> state_bytes;
  for (int iters : {100, 1000}) {
    SolveResult run = traced_solve(p, iters, false);
    tape_bytes.push_back(run.trace.retained_bytes());
    FpadAnchor anchor = make_fpad_anchor(p, run.x, run.alpha, 0.0);
    Rng rng(22);
    FpadReverseResult<ParamDelta> rev =
        fpad_reverse(p, anchor, rng.normal_vec(static_cast<std::size_t>(p.dim())), 0.0, iters);
    state_bytes.push_back(rev.peak_state_bytes);
  }
  CHECK(state_bytes[0] == state_bytes[1]);
  const double ratio = static_cast<double>(tape_bytes[1]) / static_cast<double>(tape_bytes[0]);
  CHECK(ratio > 8.0);  // linear growth in the horizon
}
