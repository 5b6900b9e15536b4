#include "proxdiff/denoise/dual.hpp"

#include <cmath>
#include <stdexcept>

#include "proxdiff/solver/apg.hpp"

namespace proxdiff::denoise {

namespace {

constexpr double kActiveAtol = 1e-10;

double pixel_norm_sq(const Field& p, int x, int y) {
  double s = 0.0;
  for (int f = 0; f < p.n_filters; ++f)
    for (int c = 0; c < p.channels; ++c) {
      const double v = p.at(x, y, c, f);
      s += v * v;
    }
  return s;
}

}  // namespace

void dual_project(Field& p) {
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double n2 = pixel_norm_sq(p, x, y);
      if (n2 <= 1.0) continue;
      const double inv = 1.0 / std::sqrt(n2);
      for (int f = 0; f < p.n_filters; ++f)
        for (int c = 0; c < p.channels; ++c) p.at(x, y, c, f) *= inv;
    }
  }
}

DenoiseResult denoise_dual_apg(const FilterBank& bank, const Image& noisy,
                               const DualSolveOptions& options) {
  if (options.iters < 1) throw std::invalid_argument("denoise_dual_apg: need at least 1 iteration");
  DenoiseResult result;
  const double lip = bank.op_norm_bound_sq();
  if (lip < 1e-300) {
    // Zero operator: no regularization at all.
    result.denoised = noisy;
    result.dual = Field::zeros(noisy.width, noisy.height, noisy.channels, bank.n_filters());
    result.anchor.p = result.dual;
    result.anchor.nu = result.dual;
    result.anchor.w = result.dual;
    result.anchor.active.assign(static_cast<std::size_t>(noisy.width) * noisy.height, false);
    result.anchor.alpha = 0.0;
    result.anchor.beta = 0.0;
    result.alpha = 0.0;
    return result;
  }
  const double alpha = 1.0 / lip;

  Field p = conv_apply(bank, noisy);
  Field p_prev = p;
  double beta = 0.0;
  for (int k = 0; k < options.iters; ++k) {
    beta = options.momentum ? nesterov_beta(k, options.q) : 0.0;
    // y = (1+beta) p - beta p_prev
    Field y = p;
    for (std::size_t i = 0; i < y.values.size(); ++i)
      y.values[i] = (1.0 + beta) * p.values[i] - beta * p_prev.values[i];
    // gradient of the dual objective at y: A (A* y - noisy)
    Image residual = conv_adjoint(bank, y);
    axpy(residual.values, -1.0, noisy.values);
    Field grad = conv_apply(bank, residual);
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] -= alpha * grad.values[i];
    dual_project(y);
    p_prev = std::move(p);
    p = std::move(y);
    if (options.record_objectives) {
      Image rec = conv_adjoint(bank, p);
      axpy(rec.values, -1.0, noisy.values);
      result.objectives.push_back(0.5 * dot(rec.values, rec.values));
    }
  }

  Image adj = conv_adjoint(bank, p);
  result.denoised = noisy;
  axpy(result.denoised.values, -1.0, adj.values);
  result.alpha = alpha;

  // Anchor: active set from the final iterate, outward multipliers from the
  // projection of the negative gradient onto the boundary normal cone.
  DualAnchor& anchor = result.anchor;
  anchor.alpha = alpha;
  anchor.beta = beta;
  anchor.nu = Field::zeros(p.width, p.height, p.channels, p.n_filters);
  anchor.active.assign(static_cast<std::size_t>(p.width) * p.height, false);

  Image res = conv_adjoint(bank, p);
  axpy(res.values, -1.0, noisy.values);
  Field grad = conv_apply(bank, res);  // gradient at p

  anchor.boundary_exact = 0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double n2 = pixel_norm_sq(p, x, y);
      if (std::sqrt(n2) < 1.0 - kActiveAtol) continue;
      anchor.active[static_cast<std::size_t>(y) * p.width + x] = true;
      double inner = 0.0;
      for (int f = 0; f < p.n_filters; ++f)
        for (int c = 0; c < p.channels; ++c) inner += -grad.at(x, y, c, f) * p.at(x, y, c, f);
      const double t = inner > 0.0 ? inner / n2 : 0.0;
      if (t == 0.0) ++anchor.boundary_exact;
      for (int f = 0; f < p.n_filters; ++f)
        for (int c = 0; c < p.channels; ++c) anchor.nu.at(x, y, c, f) = t * p.at(x, y, c, f);
    }
  }
  anchor.w = p;
  axpy(anchor.w.values, alpha, anchor.nu.values);
  anchor.p = std::move(p);
  result.dual = anchor.p;
  return result;
}

Field projection_jvp(const DualAnchor& anchor, const Field& v) {
  const Field& w = anchor.w;
  Field out = v;
  for (int y = 0; y < w.height; ++y) {
    for (int x = 0; x < w.width; ++x) {
      if (!anchor.active[static_cast<std::size_t>(y) * w.width + x]) continue;
      const double n2 = pixel_norm_sq(w, x, y);
      if (n2 == 0.0) continue;
      const double n = std::sqrt(n2);
      double inner = 0.0;
      for (int f = 0; f < w.n_filters; ++f)
        for (int c = 0; c < w.channels; ++c) inner += v.at(x, y, c, f) * w.at(x, y, c, f);
      inner /= n2;
      for (int f = 0; f < w.n_filters; ++f)
        for (int c = 0; c < w.channels; ++c)
          out.at(x, y, c, f) = (v.at(x, y, c, f) - inner * w.at(x, y, c, f)) / n;
    }
  }
  return out;
}

}  // namespace proxdiff::denoise
