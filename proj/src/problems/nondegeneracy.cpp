#include "proxdiff/problems/nondegeneracy.hpp"

#include <cmath>
#include <stdexcept>

namespace proxdiff {

NondegeneracyReport check_nondegeneracy(const ProblemInstance& problem, const Vec& x_star,
                                        double margin) {
  if (static_cast<int>(x_star.size()) != problem.dim())
    throw std::invalid_argument("check_nondegeneracy: dimension mismatch");
  const double lambda = problem.g.weight();
  NondegeneracyReport report;
  if (lambda <= 0.0) {
    report.ok = true;
    report.min_gap = 1.0;
    return report;
  }
  // v = -grad f(x*) / lambda, rowwise magnitudes off the support.
  Vec v = problem.f.grad(x_star);
  scale(v, -1.0 / lambda);
  const ActivePattern pat = problem.g.pattern(x_star);
  const int cols = problem.var_cols();
  double max_off = 0.0;
  for (int r = 0; r < problem.var_rows(); ++r) {
    if (pat.mask[static_cast<std::size_t>(r)]) continue;
    double s = 0.0;
    const std::size_t off = static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) s += v[off + c] * v[off + c];
    max_off = std::max(max_off, std::sqrt(s));
  }
  report.min_gap = 1.0 - max_off;
  report.ok = max_off <= 1.0 - margin;
  return report;
}

}  // namespace proxdiff
