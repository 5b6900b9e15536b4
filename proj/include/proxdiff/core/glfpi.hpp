#ifndef PROXDIFF_CORE_GLFPI_HPP
#define PROXDIFF_CORE_GLFPI_HPP

#include <vector>

#include "proxdiff/core/dense_matrix.hpp"
#include "proxdiff/core/vec.hpp"

namespace proxdiff {

// Generalized linear fixed-point iteration x(k+1) = B_k x(k) + b(k) with
// operators and offsets converging to a limit pair (B, b). Iterations past the
// provided prefixes use the limit operator/offset.
struct LinearFPISchedule {
  std::vector<DenseMatrix> operators;  // B_k prefix
  std::vector<Vec> offsets;            // b(k) prefix
  DenseMatrix limit_operator;          // B
  Vec limit_offset;                    // b

  const DenseMatrix& op_at(int k) const {
    return k < static_cast<int>(operators.size()) ? operators[k] : limit_operator;
  }
  const Vec& offset_at(int k) const {
    return k < static_cast<int>(offsets.size()) ? offsets[k] : limit_offset;
  }
  void validate() const;  // throws on dimension inconsistency
};

// Runs the iteration and returns x(0..iters).
std::vector<Vec> glfpi_run(const LinearFPISchedule& schedule, const Vec& x0, int iters);

}  // namespace proxdiff

#endif
