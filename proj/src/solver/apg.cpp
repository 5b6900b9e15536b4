#include "proxdiff/solver/apg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace proxdiff {

double nesterov_beta(int k, double q) {
  if (k < 0) throw std::invalid_argument("nesterov_beta: negative iteration");
  if (!(q > 2.0)) throw std::invalid_argument("nesterov_beta: q must exceed 2");
  const double b = (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + q);
  return std::clamp(b, 0.0, 1.0);
}

double MomentumRule::at(int k) const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kNesterov:
      return nesterov_beta(k, q);
    case Kind::kConstant:
      return beta;
  }
  return 0.0;
}

std::size_t SolveTrace::retained_bytes() const {
  std::size_t bytes = 0;
  for (const auto& v : x) bytes += v.size() * sizeof(double);
  for (const auto& v : y) bytes += v.size() * sizeof(double);
  for (const auto& v : w) bytes += v.size() * sizeof(double);
  bytes += (alpha.size() + beta.size() + residual.size()) * sizeof(double);
  return bytes;
}

double fixed_point_residual(const ProblemInstance& problem, const Vec& x, double alpha) {
  Vec w = x;
  axpy(w, -alpha, problem.f.grad(x));
  Vec px = problem.g.prox(w, alpha);
  axpy(px, -1.0, x);
  return norm2(px);
}

SolveResult apg_solve(const ProblemInstance& problem, const Vec& x0, const SolverConfig& cfg) {
  if (static_cast<int>(x0.size()) != problem.dim())
    throw std::invalid_argument("apg_solve: x0 dimension mismatch");
  const double lipschitz = problem.f.lipschitz;
  const double default_alpha = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  SolveResult result;
  result.x = x0;
  Vec x_prev = x0;  // x(-1) = x(0)

  const double f0 = problem.objective(x0);
  const double blowup_limit = 1e6 * (std::abs(f0) + 1.0);

  SolveTrace& trace = result.trace;
  double alpha = cfg.step_at(0, default_alpha);
  if (cfg.record_trace) {
    trace.x.push_back(x0);
    trace.residual.push_back(fixed_point_residual(problem, x0, alpha));
  }

  for (int k = 0; k < cfg.max_iters; ++k) {
    alpha = cfg.step_at(k, default_alpha);
    if (!(alpha > 0.0) || (lipschitz > 0.0 && !(alpha < 2.0 / lipschitz))) {
      std::ostringstream msg;
      msg << "apg_solve: step " << alpha << " outside (0, 2/L) with L = " << lipschitz;
      throw std::invalid_argument(msg.str());
    }
    const double beta = cfg.momentum.at(k);

    Vec y = lincomb(1.0 + beta, result.x, -beta, x_prev);
    Vec w = y;
    axpy(w, -alpha, problem.f.grad(y));
    Vec x_next = problem.g.prox(w, alpha);

    const double obj = problem.objective(x_next);
    if (!std::isfinite(obj) || obj > blowup_limit) {
      std::ostringstream msg;
      msg << "apg_solve: objective " << obj << " exceeded " << blowup_limit << " at iteration "
          << k << "; the step size or Lipschitz bound is likely wrong";
      throw std::runtime_error(msg.str());
    }

    x_prev = std::move(result.x);
    result.x = std::move(x_next);
    result.iters = k + 1;
    result.final_beta = beta;
    result.alpha = alpha;

    const double res = fixed_point_residual(problem, result.x, alpha);
    result.final_residual = res;
    if (cfg.record_trace) {
      trace.y.push_back(std::move(y));
      trace.w.push_back(std::move(w));
      trace.alpha.push_back(alpha);
      trace.beta.push_back(beta);
      trace.x.push_back(result.x);
      trace.residual.push_back(res);
    }
    if (cfg.fp_residual_tol > 0.0 && res < cfg.fp_residual_tol) {
      result.hit_tolerance = true;
      break;
    }
  }
  return result;
}

}  // namespace proxdiff
