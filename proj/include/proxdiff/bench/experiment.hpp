#ifndef PROXDIFF_BENCH_EXPERIMENT_HPP
#define PROXDIFF_BENCH_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxdiff/core/rate_fit.hpp"
#include "proxdiff/problems/instance.hpp"
#include "proxdiff/problems/nondegeneracy.hpp"

namespace proxdiff {

struct ExperimentSpec {
  enum class Problem { kLasso, kGroupLasso };
  Problem problem = Problem::kLasso;
  int m = 100;
  int n = 25;
  int l = 1;            // columns of the multi-target problem
  double lambda = 0.0;  // <= 0 selects the weight automatically
  std::uint64_t seed = 0;
  int iters = 2000;
  double q = 5.0;
  std::string out_path;
};

// Raised when no strictly-dual-feasible instance could be produced.
struct DegenerateInstanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeneratedInstance {
  ProblemInstance problem;
  Vec x_star;           // reference solution, fixed-point residual < 1e-12
  double lambda = 0.0;
  double margin = 0.0;  // nondegeneracy gap at x_star
  int retries = 0;
  double min_singular_value = 0.0;  // of the design matrix
};

// Deterministic per seed: design entries uniform on [0,1), target entries
// standard normal. The regularization weight starts at 0.1 x the largest
// dual row magnitude of A^T B and scales by 1.5 until the solution has a
// nonempty support and a nondegeneracy margin of at least 0.02 (up to 10
// retries, then DegenerateInstanceError).
GeneratedInstance generate_instance(const ExperimentSpec& spec);

// The ten error sequences: iterate, unrolled forward/reverse, and frozen
// forward/reverse derivative errors, for the plain and the accelerated
// solver. All are measured against the reduced-system reference derivative.
struct ErrorCurves {
  static constexpr int kCount = 10;
  static const std::array<const char*, kCount> kNames;
  std::array<std::vector<double>, kCount> curves;  // each of length iters + 1
  int iters = 0;
};

ErrorCurves run_error_curves(const ExperimentSpec& spec);

// One fitted rate per curve, floor 1e-11.
std::vector<RateReport> rate_table(const ErrorCurves& curves, double floor = 1e-11);

}  // namespace proxdiff

#endif
