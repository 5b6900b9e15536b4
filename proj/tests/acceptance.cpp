// Acceptance suite: one pass/fail line per numbered criterion, tolerances
// pinned in code. Returns the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "proxdiff/autodiff/engines.hpp"
#include "proxdiff/bench/csv.hpp"
#include "proxdiff/bench/experiment.hpp"
#include "proxdiff/core/glfpi.hpp"
#include "proxdiff/core/rate_fit.hpp"
#include "proxdiff/core/rng.hpp"
#include "proxdiff/core/spectral.hpp"
#include "proxdiff/denoise/bilevel.hpp"
#include "proxdiff/oracle/reduced.hpp"
#include "support/test_oracles.hpp"

using namespace proxdiff;

namespace {

constexpr int kSeedCount = 10;
constexpr int kLassoIters = 2000;
constexpr int kGroupIters = 800;
constexpr double kQ = 5.0;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

ExperimentSpec desk_spec(ExperimentSpec::Problem kind, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.problem = kind;
  spec.seed = seed;
  spec.q = kQ;
  if (kind == ExperimentSpec::Problem::kLasso) {
    spec.m = 100;
    spec.n = 25;
    spec.iters = kLassoIters;
  } else {
    spec.m = 100;
    spec.n = 10;
    spec.l = 8;
    spec.iters = kGroupIters;
  }
  return spec;
}

// Everything criteria 3-6 need from one instance and one momentum variant.
struct AlgData {
  double iter_slope = 0.0;          // k-varying solver error slope
  double matched_iter_slope = 0.0;  // constant-parameter solver error slope
  double fpad_slope = 0.0;          // frozen forward recursion error slope
  double ad_fwd_rel = 0.0;
  double ad_rev_rel = 0.0;
  int identification_iter = -1;
};

struct InstanceData {
  std::uint64_t seed = 0;
  int iters = 0;
  AlgData alg[2];  // [0] plain, [1] accelerated
};

InstanceData analyze_instance(ExperimentSpec::Problem kind, std::uint64_t seed) {
  const ExperimentSpec spec = desk_spec(kind, seed);
  GeneratedInstance gen = generate_instance(spec);
  const ProblemInstance& p = gen.problem;
  const int k_iters = spec.iters;

  const ParamDelta du = ParamDelta::lambda_direction(p.u);
  Rng xbar_rng(seed, RngStream::kDirectionXbar);
  const Vec xbar = xbar_rng.normal_vec(static_cast<std::size_t>(p.dim()));
  const Vec dx_star = solve_dpsi_jvp(build_reduced_system(p, gen.x_star, du));
  const ParamDelta ubar_star = solve_dpsi_vjp(p, gen.x_star, xbar);

  InstanceData data;
  data.seed = seed;
  data.iters = k_iters;
  const Vec x0(static_cast<std::size_t>(p.dim()), 0.0);
  for (int accel = 0; accel < 2; ++accel) {
    AlgData& alg = data.alg[accel];
    SolverConfig cfg;
    cfg.max_iters = k_iters;
    cfg.record_trace = true;
    if (accel) cfg.momentum = MomentumRule::nesterov(kQ);
    SolveResult run = apg_solve(p, x0, cfg);

    std::vector<double> iter_err;
    for (const auto& xk : run.trace.x) iter_err.push_back(norm2(sub(xk, gen.x_star)));
    alg.iter_slope = fit_linear_rate(iter_err, 1e-11).slope;

    const ActivePattern target = p.g.pattern(gen.x_star);
    int k0 = -1;
    for (int k = 0; k <= run.trace.iterations(); ++k) {
      if (p.g.pattern(run.trace.x[static_cast<std::size_t>(k)]) == target) {
        if (k0 < 0) k0 = k;
      } else {
        k0 = -1;
      }
    }
    alg.identification_iter = k0;

    const std::vector<Vec> fwd = ad_forward(p, run.trace, du);
    alg.ad_fwd_rel = norm2(sub(fwd.back(), dx_star)) / norm2(dx_star);
    const ParamDelta ubar = ad_reverse(p, run.trace, xbar);
    alg.ad_rev_rel = norm2(sub(ubar, ubar_star)) / norm2(ubar_star);

    // Frozen recursion anchored at the solver's own final iterate, with the
    // final momentum value.
    const double beta = accel ? run.trace.beta.back() : 0.0;
    const FpadAnchor anchor = make_fpad_anchor(p, run.x, run.alpha, beta);
    const FpadForwardResult limit = fpad_forward(p, anchor, du, 500000, 1e-14);
    const FpadForwardResult seq = fpad_forward(p, anchor, du, k_iters, 0.0, true);
    std::vector<double> fpad_err;
    for (const auto& v : seq.seq) fpad_err.push_back(norm2(sub(v, limit.limit)));
    alg.fpad_slope = fit_linear_rate(fpad_err, 1e-11).slope;

    // Matched constant-parameter solver run for the rate-transfer pairing.
    SolverConfig matched;
    matched.max_iters = k_iters;
    matched.record_trace = true;
    matched.momentum = MomentumRule::constant(beta);
    SolveResult matched_run = apg_solve(p, x0, matched);
    std::vector<double> matched_err;
    for (const auto& xk : matched_run.trace.x)
      matched_err.push_back(norm2(sub(xk, gen.x_star)));
    alg.matched_iter_slope = fit_linear_rate(matched_err, 1e-11).slope;
  }
  return data;
}

struct Criterion {
  int number;
  std::string name;
  std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------

bool criterion_engine_equivalence(std::string& detail) {
  const double t0 = now_seconds();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= kSeedCount; ++seed) {
    GeneratedInstance gen = generate_instance(desk_spec(ExperimentSpec::Problem::kLasso, seed));
    const ProblemInstance& p = gen.problem;
    SolverConfig cfg;
    cfg.max_iters = kLassoIters;
    cfg.momentum = MomentumRule::nesterov(kQ);
    SolveResult run = apg_solve(p, Vec(static_cast<std::size_t>(p.dim()), 0.0), cfg);
    FpadAnchor anchor = make_fpad_anchor(p, run.x, run.alpha, run.final_beta);
    const ParamDelta du = ParamDelta::lambda_direction(p.u);
    FpadForwardResult fwd = fpad_forward(p, anchor, du, 500000, 1e-14);
    ImplicitJvpResult imp = implicit_diff_jvp(p, anchor, du, 1e-14, 500000);
    if (!fwd.converged || !imp.converged) {
      detail = "solver did not converge";
      return false;
    }
    worst = std::max(worst, norm2(sub(fwd.limit, imp.x)) / norm2(imp.x));
  }
  const double elapsed = now_seconds() - t0;
  std::ostringstream os;
  os << "worst rel diff " << worst << ", " << elapsed << " s";
  detail = os.str();
  return worst < 1e-9 && elapsed < 5.0;
}

bool criterion_oracle_agreement(std::string& detail) {
  double worst_engine = 0.0, worst_fd = 0.0;
  for (auto kind : {ExperimentSpec::Problem::kLasso, ExperimentSpec::Problem::kGroupLasso}) {
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      const ExperimentSpec spec = desk_spec(kind, seed);
      GeneratedInstance gen = generate_instance(spec);
      const ProblemInstance& p = gen.problem;
      const double alpha = 1.0 / p.f.lipschitz;
      const double beta = nesterov_beta(spec.iters - 1, kQ);
      const ParamDelta du = ParamDelta::lambda_direction(p.u);
      Rng rng(seed, RngStream::kDirectionXbar);
      const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));

      const Vec dx_star = solve_dpsi_jvp(build_reduced_system(p, gen.x_star, du));
      const ParamDelta ubar_star = solve_dpsi_vjp(p, gen.x_star, xbar);

      // Frozen-recursion limits at the residual-1e-12 anchor.
      FpadAnchor anchor = make_fpad_anchor(p, gen.x_star, alpha, beta);
      FpadForwardResult fwd = fpad_forward(p, anchor, du, 500000, 1e-14);
      FpadReverseResult<ParamDelta> rev = fpad_reverse(p, anchor, xbar, 1e-14, 500000);
      if (!fwd.converged || !rev.converged) {
        detail = "frozen recursion did not converge";
        return false;
      }
      worst_engine = std::max(worst_engine, norm2(sub(fwd.limit, dx_star)) / norm2(dx_star));
      worst_engine =
          std::max(worst_engine, norm2(sub(rev.u_tilde, ubar_star)) / norm2(ubar_star));

      // Reference itself against central finite differences of re-solves.
      const double h = 1e-5;
      auto resolve = [&](double lambda) {
        ParamPack u = p.u;
        u.reg_weight = lambda;
        ProblemInstance shifted = make_group_lasso_instance(std::move(u));
        SolverConfig cfg;
        cfg.alpha = alpha;
        cfg.max_iters = 500000;
        cfg.fp_residual_tol = 1e-13;
        cfg.momentum = MomentumRule::nesterov(kQ);
        SolveResult res =
            apg_solve(shifted, Vec(static_cast<std::size_t>(shifted.dim()), 0.0), cfg);
        if (!res.hit_tolerance) throw std::runtime_error("re-solve did not reach tolerance");
        if (!(shifted.g.pattern(res.x) == p.g.pattern(gen.x_star)))
          throw std::runtime_error("pattern changed across the finite-difference step");
        return res.x;
      };
      Vec fd = sub(resolve(p.u.reg_weight + h), resolve(p.u.reg_weight - h));
      scale(fd, 1.0 / (2.0 * h));
      worst_fd = std::max(worst_fd, norm2(sub(dx_star, fd)) / norm2(fd));
    }
  }
  std::ostringstream os;
  os << "worst engine-vs-reference " << worst_engine << ", worst reference-vs-fd " << worst_fd;
  detail = os.str();
  return worst_engine < 1e-6 && worst_fd < 1e-4;
}

bool criterion_unrolled_ad(const std::vector<InstanceData>& lasso,
                           const std::vector<InstanceData>& group, std::string& detail) {
  int lasso_pass = 0, group_pass = 0;
  double worst = 0.0;
  for (const auto& d : lasso) {
    const double e = std::max(d.alg[1].ad_fwd_rel, d.alg[1].ad_rev_rel);
    worst = std::max(worst, e);
    if (e < 1e-5) ++lasso_pass;
  }
  for (const auto& d : group) {
    const double e = std::max(d.alg[1].ad_fwd_rel, d.alg[1].ad_rev_rel);
    worst = std::max(worst, e);
    if (e < 1e-5) ++group_pass;
  }
  std::ostringstream os;
  os << lasso_pass << "/10 and " << group_pass << "/10 seeds below 1e-5 (worst " << worst << ")";
  detail = os.str();
  return lasso_pass >= 9 && group_pass >= 9;
}

bool criterion_rate_transfer(const std::vector<InstanceData>& lasso,
                             const std::vector<InstanceData>& group, std::string& detail) {
  int checks = 0, passed = 0;
  double worst = 0.0;
  auto visit = [&](const std::vector<InstanceData>& set) {
    for (const auto& d : set) {
      for (int accel = 0; accel < 2; ++accel) {
        const double ratio = d.alg[accel].fpad_slope / d.alg[accel].matched_iter_slope;
        worst = std::max(worst, std::abs(ratio - 1.0));
        ++checks;
        if (std::abs(ratio - 1.0) <= 0.2) ++passed;
      }
    }
  };
  visit(lasso);
  visit(group);
  std::ostringstream os;
  os << passed << "/" << checks << " slope pairs within 20% (worst deviation " << worst << ")";
  detail = os.str();
  return passed == checks;
}

bool criterion_acceleration_ordering(const std::vector<InstanceData>& lasso,
                                     std::string& detail) {
  int iterate_ok = 0, fpad_ok = 0;
  for (const auto& d : lasso) {
    if (d.alg[1].iter_slope < d.alg[0].iter_slope) ++iterate_ok;
    if (d.alg[1].fpad_slope < d.alg[0].fpad_slope) ++fpad_ok;
  }
  std::ostringstream os;
  os << "iterate ordering " << iterate_ok << "/10, frozen-derivative ordering " << fpad_ok
     << "/10";
  detail = os.str();
  return iterate_ok >= 9 && fpad_ok >= 9;
}

bool criterion_identification(const std::vector<InstanceData>& lasso,
                              const std::vector<InstanceData>& group, std::string& detail) {
  int latest = -1;
  bool ok = true;
  auto visit = [&](const std::vector<InstanceData>& set) {
    for (const auto& d : set)
      for (int accel = 0; accel < 2; ++accel) {
        const int k0 = d.alg[accel].identification_iter;
        ok = ok && k0 >= 0 && k0 < d.iters;
        latest = std::max(latest, k0);
      }
  };
  visit(lasso);
  visit(group);
  std::ostringstream os;
  os << "all 40 runs identified; latest at iteration " << latest;
  detail = os.str();
  return ok;
}

bool criterion_glfpi(std::string& detail) {
  const int n = 5;
  double worst_limit = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed, RngStream::kGeneric);
    DenseMatrix b(n, n, rng.normal_vec(n * n));
    const double target = 0.3 + 0.6 * rng.uniform01();  // spectral radius <= 0.9
    b *= target / spectral_radius(b, 1e-12, 100000);
    Vec offset = rng.normal_vec(n);

    LinearFPISchedule sched;
    sched.limit_operator = b;
    sched.limit_offset = offset;
    for (int k = 0; k < 50; ++k) {
      DenseMatrix bk = b;
      DenseMatrix noise(n, n, rng.normal_vec(n * n));
      bk.add_scaled(noise, 0.05 * std::pow(0.5, k));
      sched.operators.push_back(bk);
      Vec off_k = offset;
      axpy(off_k, std::pow(0.5, k), rng.normal_vec(n));
      sched.offsets.push_back(off_k);
    }
    DenseMatrix i_minus_b = DenseMatrix::identity(n);
    i_minus_b.add_scaled(b, -1.0);
    const Vec x_ref = testsupport::dense_solve(i_minus_b, offset);
    auto seq = glfpi_run(sched, rng.normal_vec(n), 800);
    worst_limit = std::max(worst_limit, norm2(sub(seq.back(), x_ref)));
  }

  // Subspace-confined schedules: operators and offsets supported on a fixed
  // coordinate subspace V; the limit must lie in V.
  double worst_off_v = 0.0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Rng rng(seed, RngStream::kGeneric);
    const int dim = 6;
    std::vector<bool> in_v(dim);
    int v_dim = 0;
    for (int i = 0; i < dim; ++i) {
      in_v[static_cast<std::size_t>(i)] = rng.uniform01() < 0.5;
      if (in_v[static_cast<std::size_t>(i)]) ++v_dim;
    }
    if (v_dim == 0) in_v[0] = true;
    auto mask_rows = [&](DenseMatrix m) {
      for (int i = 0; i < dim; ++i)
        if (!in_v[static_cast<std::size_t>(i)])
          for (int j = 0; j < dim; ++j) m.at(i, j) = 0.0;
      return m;
    };
    DenseMatrix c(dim, dim, rng.normal_vec(dim * dim));
    DenseMatrix b = mask_rows(c);
    const double rho = spectral_radius(b, 1e-12, 100000);
    if (rho > 0.0) b *= 0.8 / rho;
    Vec offset = rng.normal_vec(dim);
    for (int i = 0; i < dim; ++i)
      if (!in_v[static_cast<std::size_t>(i)]) offset[static_cast<std::size_t>(i)] = 0.0;

    LinearFPISchedule sched;
    sched.limit_operator = b;
    sched.limit_offset = offset;
    for (int k = 0; k < 40; ++k) {
      DenseMatrix noise(dim, dim, rng.normal_vec(dim * dim));
      DenseMatrix bk = b;
      bk.add_scaled(mask_rows(noise), 0.05 * std::pow(0.5, k));
      sched.operators.push_back(bk);
      Vec off_k = offset;
      Vec off_noise = rng.normal_vec(dim);
      for (int i = 0; i < dim; ++i)
        if (!in_v[static_cast<std::size_t>(i)]) off_noise[static_cast<std::size_t>(i)] = 0.0;
      axpy(off_k, std::pow(0.5, k), off_noise);
      sched.offsets.push_back(off_k);
    }
    auto seq = glfpi_run(sched, rng.normal_vec(dim), 800);
    for (int i = 0; i < dim; ++i)
      if (!in_v[static_cast<std::size_t>(i)])
        worst_off_v = std::max(worst_off_v, std::abs(seq.back()[static_cast<std::size_t>(i)]));
  }
  std::ostringstream os;
  os << "worst limit error " << worst_limit << ", worst off-subspace component " << worst_off_v;
  detail = os.str();
  return worst_limit < 1e-8 && worst_off_v < 1e-10;
}

bool criterion_memory(std::string& detail) {
  GeneratedInstance gen = generate_instance(desk_spec(ExperimentSpec::Problem::kLasso, 1));
  const ProblemInstance& p = gen.problem;
  std::vector<int> horizons{100, 1000, 10000};
  std::vector<std::size_t> tape_bytes, state_bytes;
  Rng rng(2);
  const Vec xbar = rng.normal_vec(static_cast<std::size_t>(p.dim()));
  for (int k : horizons) {
    SolverConfig cfg;
    cfg.max_iters = k;
    cfg.record_trace = true;
    SolveResult run = apg_solve(p, Vec(static_cast<std::size_t>(p.dim()), 0.0), cfg);
    tape_bytes.push_back(run.trace.retained_bytes());
    FpadAnchor anchor = make_fpad_anchor(p, run.x, run.alpha, 0.0);
    FpadReverseResult<ParamDelta> rev = fpad_reverse(p, anchor, xbar, 0.0, k);
    state_bytes.push_back(rev.peak_state_bytes);
  }
  const double state_ratio =
      static_cast<double>(state_bytes[2]) / static_cast<double>(state_bytes[0]);
  bool ok = state_ratio <= 1.05;
  std::ostringstream os;
  os << "state ratio " << state_ratio;
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    const double tape_ratio =
        static_cast<double>(tape_bytes[i]) / static_cast<double>(tape_bytes[0]);
    const double k_ratio = static_cast<double>(horizons[i]) / static_cast<double>(horizons[0]);
    os << ", tape x" << tape_ratio << " for horizon x" << k_ratio;
    ok = ok && tape_ratio >= 0.9 * k_ratio && tape_ratio <= 1.1 * k_ratio;
  }
  detail = os.str();
  return ok;
}

bool criterion_derivative_micro_suite(std::string& detail) {
  double worst_fd = 0.0, worst_dot = 0.0;

  // Shrinkage derivatives vs central finite differences, both regularizers.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed, RngStream::kGeneric);
    for (int cols : {1, 3}) {
      const int rows = 6;
      NonsmoothTerm term(rows, cols, 0.9);
      const double alpha = 0.7;
      Vec w = rng.normal_vec(static_cast<std::size_t>(rows) * cols);
      // keep rows away from the kink
      for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += w[static_cast<std::size_t>(r) * cols + c] *
                                             w[static_cast<std::size_t>(r) * cols + c];
        if (std::abs(std::sqrt(s) - alpha * 0.9) < 1e-3)
          for (int c = 0; c < cols; ++c) w[static_cast<std::size_t>(r) * cols + c] *= 1.5;
      }
      Vec dw = rng.normal_vec(w.size());
      const double dl = rng.normal();
      Vec got = term.prox_jvp(w, alpha, dw, dl);
      auto prox_of = [&](double t) {
        Vec ws = w;
        axpy(ws, t, dw);
        NonsmoothTerm shifted(rows, cols, 0.9 + t * dl);
        return shifted.prox(ws, alpha);
      };
      Vec fd = testsupport::central_diff(prox_of, 0.0, 1e-6);
      worst_fd = std::max(worst_fd, testsupport::rel_err(got, fd));

      // Transpose pairing of the same derivative.
      Vec vbar = rng.normal_vec(w.size());
      const double lhs = dot(vbar, got);
      const double rhs =
          dot(term.prox_vjp_w(w, alpha, vbar), dw) + term.prox_vjp_lambda(w, alpha, vbar) * dl;
      worst_dot = std::max(worst_dot, std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30));
    }
  }

  // Smooth-term parameter derivatives vs finite differences plus pairing.
  for (std::uint64_t seed = 5; seed < 8; ++seed) {
    Rng rng(seed, RngStream::kGeneric);
    const int m = 9, n = 4, l = 2;
    ParamPack u(DenseMatrix(m, n, rng.uniform_vec(static_cast<std::size_t>(m) * n, 0.0, 1.0)),
                DenseMatrix(m, l, rng.normal_vec(static_cast<std::size_t>(m) * l)), 0.4);
    SmoothTerm f = least_squares_smooth(u);
    Vec x = rng.normal_vec(static_cast<std::size_t>(n) * l);
    ParamDelta du = ParamDelta::zeros_like(u);
    du.d_design = DenseMatrix(m, n, rng.normal_vec(static_cast<std::size_t>(m) * n));
    du.d_target = DenseMatrix(m, l, rng.normal_vec(static_cast<std::size_t>(m) * l));
    Vec got = f.cross_jvp(x, du);
    auto grad_of = [&](double t) {
      ParamPack shifted = u;
      shifted.design.add_scaled(du.d_design, t);
      shifted.target.add_scaled(du.d_target, t);
      return least_squares_smooth(shifted).grad(x);
    };
    Vec fd = testsupport::central_diff(grad_of, 0.0, 1e-6);
    worst_fd = std::max(worst_fd, testsupport::rel_err(got, fd));

    Vec vbar = rng.normal_vec(x.size());
    const double lhs = dot(vbar, got);
    const double rhs = dot(f.cross_vjp(x, vbar), du);
    worst_dot = std::max(worst_dot, std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30));
  }

  // Convolution adjoint dot tests.
  for (std::uint64_t seed = 8; seed < 11; ++seed) {
    Rng rng(seed, RngStream::kGeneric);
    auto basis = denoise::dct_basis_5x5();
    DenseMatrix theta(3, 24, rng.uniform_vec(72, -0.3, 0.7));
    denoise::FilterBank bank(basis, theta);
    denoise::Image img = denoise::Image::zeros(9, 7, 1);
    for (double& v : img.values) v = rng.uniform01();
    denoise::Field field = denoise::Field::zeros(9, 7, 1, 3);
    for (double& v : field.values) v = rng.normal();
    const double lhs = dot(denoise::conv_apply(bank, img).values, field.values);
    const double rhs = dot(img.values, denoise::conv_adjoint(bank, field).values);
    worst_dot = std::max(worst_dot, std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30));
  }

  std::ostringstream os;
  os << "worst finite-difference rel err " << worst_fd << ", worst pairing mismatch "
     << worst_dot;
  detail = os.str();
  return worst_fd < 1e-5 && worst_dot < 1e-9;
}

bool criterion_bilevel(std::string& detail) {
  const double t0 = now_seconds();

  std::vector<denoise::Image> grounds;
  for (std::uint64_t s = 0; s < 5; ++s)
    grounds.push_back(denoise::synthetic_patch(16, 16, 1, 100 + s));
  auto dataset = denoise::make_noisy_dataset(grounds, 40.0 / 255.0, 7);

  denoise::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.inner_iters = 200;
  cfg.n_filters = 6;
  cfg.seed = 7;
  denoise::TrainResult result = denoise::train(dataset, cfg);
  const double loss0 = result.epoch_mean_loss.front();
  const double loss5 = result.epoch_mean_loss.back();

  denoise::FilterBank bank(denoise::dct_basis_5x5(), result.theta);
  double psnr_noisy = 0.0, psnr_rec = 0.0;
  for (const auto& [noisy, ground] : dataset) {
    denoise::DualSolveOptions options;
    options.iters = cfg.inner_iters;
    denoise::DenoiseResult res = denoise::denoise_dual_apg(bank, noisy, options);
    psnr_noisy += denoise::psnr(denoise::clamp01(noisy), ground).db;
    psnr_rec += denoise::psnr(denoise::clamp01(res.denoised), ground).db;
  }
  psnr_noisy /= 5.0;
  psnr_rec /= 5.0;

  // Finite-difference gate on an 8x8 two-filter probe at two weight points.
  double worst_fd = 0.0;
  const denoise::Image probe_ground = denoise::synthetic_patch(8, 8, 1, 200);
  const auto probe_pair = denoise::make_noisy_dataset({probe_ground}, 40.0 / 255.0, 201);
  const denoise::Image& probe_noisy = probe_pair[0].first;
  const auto basis = denoise::dct_basis_5x5();
  const int probe_inner = 2000;
  for (std::uint64_t s = 0; s < 2; ++s) {
    Rng rng(300 + s, RngStream::kThetaInit);
    DenseMatrix theta(2, 24, rng.uniform_vec(48, 0.0, s == 0 ? 0.01 : 0.05));
    denoise::FilterBank probe_bank(basis, theta);
    denoise::BilevelGradResult got =
        denoise::bilevel_grad(probe_bank, probe_noisy, probe_ground, probe_inner, 4 * probe_inner,
                              1e-13);
    auto loss_at = [&](const DenseMatrix& th) {
      denoise::FilterBank b(basis, th);
      denoise::DualSolveOptions options;
      options.iters = probe_inner;
      denoise::DenoiseResult res = denoise::denoise_dual_apg(b, probe_noisy, options);
      denoise::Image r = res.denoised;
      axpy(r.values, -1.0, probe_ground.values);
      return 0.5 * dot(r.values, r.values);
    };
    const double h = 1e-6;
    DenseMatrix fd(2, 24);
    for (int f = 0; f < 2; ++f)
      for (int sdx = 0; sdx < 24; ++sdx) {
        DenseMatrix plus = theta, minus = theta;
        plus.at(f, sdx) += h;
        minus.at(f, sdx) -= h;
        fd.at(f, sdx) = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
      }
    DenseMatrix diff = got.grad;
    diff.add_scaled(fd, -1.0);
    worst_fd = std::max(worst_fd, diff.frobenius_norm() / fd.frobenius_norm());
  }

  const double elapsed = now_seconds() - t0;
  std::ostringstream os;
  os << "epoch loss " << loss0 << " -> " << loss5 << ", psnr " << psnr_noisy << " -> " << psnr_rec
     << " dB, worst grad-vs-fd " << worst_fd << ", " << elapsed << " s";
  detail = os.str();
  return loss5 < loss0 && psnr_rec >= psnr_noisy && worst_fd < 1e-3 && elapsed < 120.0;
}

bool criterion_determinism(std::string& detail) {
#ifndef PROXDIFF_CLI_PATH
  detail = "CLI path not configured";
  return false;
#else
  const std::string cli = PROXDIFF_CLI_PATH;
  auto run_once = [&](const std::string& out) {
    const std::string cmd = cli + " bench --m 40 --n 10 --seed 5 --iters 150 --out " + out +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  if (!run_once("acc_det_a.csv") || !run_once("acc_det_b.csv")) {
    detail = "CLI invocation failed";
    return false;
  }
  std::ifstream fa("acc_det_a.csv", std::ios::binary), fb("acc_det_b.csv", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  std::remove("acc_det_a.csv");
  std::remove("acc_det_b.csv");
  std::ostringstream os;
  os << sa.size() << " bytes, " << (sa == sb ? "identical" : "DIFFERENT");
  detail = os.str();
  return !sa.empty() && sa == sb;
#endif
}

}  // namespace

int main() {
  std::printf("building per-instance data (10 seeds x 2 problems)...\n");
  std::fflush(stdout);
  std::vector<InstanceData> lasso, group;
  for (std::uint64_t seed = 1; seed <= kSeedCount; ++seed) {
    lasso.push_back(analyze_instance(ExperimentSpec::Problem::kLasso, seed));
    group.push_back(analyze_instance(ExperimentSpec::Problem::kGroupLasso, seed));
  }

  std::vector<Criterion> criteria;
  criteria.push_back({1, "engine equivalence (frozen forward vs implicit solve)",
                      criterion_engine_equivalence});
  criteria.push_back({2, "oracle agreement (engines vs reduced system vs finite differences)",
                      criterion_oracle_agreement});
  criteria.push_back({3, "unrolled AD convergence at desk horizons",
                      [&](std::string& d) { return criterion_unrolled_ad(lasso, group, d); }});
  criteria.push_back({4, "rate transfer (frozen recursion vs matched solver)",
                      [&](std::string& d) { return criterion_rate_transfer(lasso, group, d); }});
  criteria.push_back({5, "acceleration ordering of fitted rates",
                      [&](std::string& d) { return criterion_acceleration_ordering(lasso, d); }});
  criteria.push_back({6, "finite identification of the active pattern",
                      [&](std::string& d) { return criterion_identification(lasso, group, d); }});
  criteria.push_back({7, "generalized linear fixed-point iteration properties", criterion_glfpi});
  criteria.push_back({8, "memory contract (flat reverse state, linear tape)", criterion_memory});
  criteria.push_back({9, "derivative correctness micro-suite",
                      criterion_derivative_micro_suite});
  criteria.push_back({10, "bilevel desk training run", criterion_bilevel});
  criteria.push_back({11, "byte-identical CLI outputs", criterion_determinism});

  int failed = 0;
  for (auto& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failed;
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", c.number, c.name.c_str(),
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
