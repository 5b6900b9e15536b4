#include "proxdiff/core/glfpi.hpp"

#include <stdexcept>

namespace proxdiff {

void LinearFPISchedule::validate() const {
  const int n = limit_operator.rows();
  if (limit_operator.cols() != n)
    throw std::invalid_argument("LinearFPISchedule: limit operator must be square");
  if (static_cast<int>(limit_offset.size()) != n)
    throw std::invalid_argument("LinearFPISchedule: limit offset dimension mismatch");
  for (const auto& b : operators)
    if (b.rows() != n || b.cols() != n)
      throw std::invalid_argument("LinearFPISchedule: operator dimension mismatch");
  for (const auto& off : offsets)
    if (static_cast<int>(off.size()) != n)
      throw std::invalid_argument("LinearFPISchedule: offset dimension mismatch");
}

std::vector<Vec> glfpi_run(const LinearFPISchedule& schedule, const Vec& x0, int iters) {
  schedule.validate();
  if (static_cast<int>(x0.size()) != schedule.limit_operator.rows())
    throw std::invalid_argument("glfpi_run: x0 dimension mismatch");
  if (iters < 0) throw std::invalid_argument("glfpi_run: negative iteration count");

  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(iters) + 1);
  out.push_back(x0);
  Vec x = x0;
  for (int k = 0; k < iters; ++k) {
    Vec next = schedule.op_at(k).apply(x);
    axpy(next, 1.0, schedule.offset_at(k));
    x = std::move(next);
    out.push_back(x);
  }
  return out;
}

}  // namespace proxdiff
