#ifndef PROXDIFF_CORE_RATE_FIT_HPP
#define PROXDIFF_CORE_RATE_FIT_HPP

#include <vector>

namespace proxdiff {

struct RateReport {
  double slope = 0.0;        // log10(error) decrease per iteration
  int window_start = 0;
  int window_end = 0;        // inclusive
  double residual_floor = 0.0;
  double r_squared = 0.0;
};

// Least-squares slope of log10(error) against iteration index.
//
// Window selection: the window ends just before the error first drops below
// max(floor, 2 * min positive error), so a flat tail at the sequence's own
// noise floor is excluded even when that floor sits above `floor`. The window
// start is the earliest index from which the log-linear fit over the suffix
// reaches r^2 >= 0.98 (falling back to the best-r^2 suffix of length >= 10);
// this skips the pre-identification head, where the decay has not settled
// into its final linear regime.
//
// Throws std::invalid_argument if fewer than 10 entries lie above `floor`.
RateReport fit_linear_rate(const std::vector<double>& errors, double floor);

}  // namespace proxdiff

#endif
