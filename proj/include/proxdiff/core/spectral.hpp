#ifndef PROXDIFF_CORE_SPECTRAL_HPP
#define PROXDIFF_CORE_SPECTRAL_HPP

#include <cstdint>
#include <functional>

#include "proxdiff/core/dense_matrix.hpp"
#include "proxdiff/core/vec.hpp"

namespace proxdiff {

struct SpectralEstimate {
  double value = 0.0;
  bool converged = false;
  int iters = 0;
};

// Largest |eigenvalue| by power iteration. The estimate is the geometric mean
// of the growth factors over a trailing window, which also handles negative
// and complex-pair dominant eigenvalues. Starts from the all-ones vector and
// restarts once from a seeded random vector if the estimate stagnates.
SpectralEstimate spectral_radius_estimate(const std::function<Vec(const Vec&)>& apply, int dim,
                                          double tol, int max_iters,
                                          std::uint64_t restart_seed = 0x5eedULL);

SpectralEstimate spectral_radius_estimate(const DenseMatrix& m, double tol, int max_iters);

// Convenience form; throws if m is not square.
double spectral_radius(const DenseMatrix& m, double tol = 1e-12, int max_iters = 100000);

// Smallest eigenvalue of a symmetric PSD operator via the shifted power
// iteration lambda_min = s - rho(s I - M) with s slightly above rho(M).
double symmetric_min_eigenvalue(const std::function<Vec(const Vec&)>& apply, int dim,
                                double tol = 1e-11, int max_iters = 200000);
double symmetric_min_eigenvalue(const DenseMatrix& m, double tol = 1e-11, int max_iters = 200000);

}  // namespace proxdiff

#endif
