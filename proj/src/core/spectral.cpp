#include "proxdiff/core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "proxdiff/core/rng.hpp"

namespace proxdiff {

namespace {

SpectralEstimate power_iterate(const std::function<Vec(const Vec&)>& apply, Vec v, double tol,
                               int max_iters) {
  SpectralEstimate est;
  const int window = 32;
  std::deque<double> log_growth;
  double nv = norm2(v);
  if (nv == 0.0) return est;
  scale(v, 1.0 / nv);

  double prev_window_mean = -1.0;
  int stable = 0;
  for (int k = 0; k < max_iters; ++k) {
    Vec w = apply(v);
    const double g = norm2(w);
    est.iters = k + 1;
    if (g == 0.0) {
      // The operator annihilated the vector; radius 0 along this direction.
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    log_growth.push_back(std::log(g));
    if (static_cast<int>(log_growth.size()) > window) log_growth.pop_front();
    scale(w, 1.0 / g);
    v = std::move(w);

    double mean = 0.0;
    for (double lg : log_growth) mean += lg;
    mean /= static_cast<double>(log_growth.size());
    const double value = std::exp(mean);
    est.value = value;

    if (static_cast<int>(log_growth.size()) == window) {
      const double denom = std::max(std::abs(value), 1e-300);
      if (prev_window_mean >= 0.0 && std::abs(value - prev_window_mean) / denom < tol) {
        ++stable;
        if (stable >= window) {
          est.converged = true;
          return est;
        }
      } else {
        stable = 0;
      }
      prev_window_mean = value;
    }
  }
  return est;
}

}  // namespace

SpectralEstimate spectral_radius_estimate(const std::function<Vec(const Vec&)>& apply, int dim,
                                          double tol, int max_iters, std::uint64_t restart_seed) {
  Vec ones(static_cast<std::size_t>(dim), 1.0);
  SpectralEstimate first = power_iterate(apply, ones, tol, max_iters / 2 + 1);
  if (first.converged) return first;
  // One fixed random restart on stagnation.
  Rng rng(restart_seed, RngStream::kRestart);
  Vec v = rng.normal_vec(static_cast<std::size_t>(dim));
  SpectralEstimate second = power_iterate(apply, v, tol, max_iters - first.iters);
  second.iters += first.iters;
  if (!second.converged && first.value > second.value) {
    first.iters = second.iters;
    return first;
  }
  return second;
}

SpectralEstimate spectral_radius_estimate(const DenseMatrix& m, double tol, int max_iters) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
  return spectral_radius_estimate([&m](const Vec& v) { return m.apply(v); }, m.rows(), tol,
                                  max_iters);
}

double spectral_radius(const DenseMatrix& m, double tol, int max_iters) {
  return spectral_radius_estimate(m, tol, max_iters).value;
}

double symmetric_min_eigenvalue(const std::function<Vec(const Vec&)>& apply, int dim, double tol,
                                int max_iters) {
  SpectralEstimate top = spectral_radius_estimate(apply, dim, tol, max_iters);
  const double s = top.value * (1.0 + 1e-6) + 1e-300;
  auto shifted = [&](const Vec& v) {
    Vec w = apply(v);
    for (int i = 0; i < dim; ++i) w[i] = s * v[i] - w[i];
    return w;
  };
  SpectralEstimate rho_shift = spectral_radius_estimate(shifted, dim, tol, max_iters);
  return s - rho_shift.value;
}

double symmetric_min_eigenvalue(const DenseMatrix& m, double tol, int max_iters) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("symmetric_min_eigenvalue: matrix must be square");
  return symmetric_min_eigenvalue([&m](const Vec& v) { return m.apply(v); }, m.rows(), tol,
                                  max_iters);
}

}  // namespace proxdiff
