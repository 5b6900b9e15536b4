#include "proxdiff/core/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace proxdiff {

namespace {

struct FitAccum {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  void remove(double x, double y) {
    n -= 1;
    sx -= x;
    sy -= y;
    sxx -= x * x;
    sxy -= x * y;
    syy -= y * y;
  }
  // slope and r^2 of the least-squares line; r^2 = 1 when the data has no
  // vertical variance (a constant sequence is a perfect fit).
  void fit(double& slope, double& r2) const {
    const double denom = n * sxx - sx * sx;
    slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double ss_tot = syy - sy * sy / n;
    if (ss_tot <= 1e-30) {
      r2 = 1.0;
      return;
    }
    const double ss_res = ss_tot - slope * (sxy - sx * sy / n);
    r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  }
};

}  // namespace

RateReport fit_linear_rate(const std::vector<double>& errors, double floor) {
  for (double e : errors) {
    if (e < 0.0 || !std::isfinite(e))
      throw std::invalid_argument("fit_linear_rate: errors must be finite and nonnegative");
  }
  int usable = 0;
  double min_pos = std::numeric_limits<double>::infinity();
  for (double e : errors) {
    if (e > floor) ++usable;
    if (e > 0.0) min_pos = std::min(min_pos, e);
  }
  if (usable < 10) throw std::invalid_argument("fit_linear_rate: too few points above floor");

  const double eff_floor = std::max(floor, 2.0 * min_pos);
  int last = -1;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (errors[k] <= eff_floor) break;
    last = static_cast<int>(k);
  }
  if (last + 1 < 10) {
    // The adaptive floor ate the whole sequence (e.g. near-constant errors);
    // fall back to everything above the requested floor.
    last = -1;
    for (std::size_t k = 0; k < errors.size(); ++k)
      if (errors[k] > floor) last = static_cast<int>(k);
  }

  std::vector<std::pair<int, double>> pts;  // (iteration, log10 error), indices 0..last
  pts.reserve(static_cast<std::size_t>(last) + 1);
  for (int k = 0; k <= last; ++k)
    if (errors[k] > floor) pts.emplace_back(k, std::log10(errors[k]));
  if (static_cast<int>(pts.size()) < 10)
    throw std::invalid_argument("fit_linear_rate: too few points above floor in window");

  // Longest suffix whose fit is cleanly linear, relaxing the cleanliness
  // threshold in tiers so that oscillatory-but-linear decays keep a long
  // window instead of collapsing onto a short high-r^2 fragment.
  const int min_len = 10;
  const int n_pts = static_cast<int>(pts.size());
  std::vector<double> slopes(static_cast<std::size_t>(n_pts), 0.0);
  std::vector<double> r2s(static_cast<std::size_t>(n_pts), -1.0);
  {
    FitAccum suffix;
    for (auto [k, y] : pts) suffix.add(k, y);
    for (int start = 0; start + min_len <= n_pts; ++start) {
      if (start > 0) suffix.remove(pts[start - 1].first, pts[start - 1].second);
      suffix.fit(slopes[static_cast<std::size_t>(start)], r2s[static_cast<std::size_t>(start)]);
    }
  }
  int chosen_start = -1;
  for (double threshold : {0.98, 0.95, 0.90}) {
    for (int start = 0; start + min_len <= n_pts; ++start) {
      if (r2s[static_cast<std::size_t>(start)] >= threshold) {
        chosen_start = start;
        break;
      }
    }
    if (chosen_start >= 0) break;
  }
  if (chosen_start < 0) {
    double best_r2 = -2.0;
    for (int start = 0; start + min_len <= n_pts; ++start) {
      if (r2s[static_cast<std::size_t>(start)] > best_r2) {
        best_r2 = r2s[static_cast<std::size_t>(start)];
        chosen_start = start;
      }
    }
  }
  const double chosen_slope = slopes[static_cast<std::size_t>(chosen_start)];
  const double chosen_r2 = r2s[static_cast<std::size_t>(chosen_start)];

  RateReport report;
  report.slope = chosen_slope;
  report.window_start = pts[static_cast<std::size_t>(chosen_start)].first;
  report.window_end = pts.back().first;
  report.residual_floor = eff_floor;
  report.r_squared = chosen_r2;
  return report;
}

}  // namespace proxdiff
