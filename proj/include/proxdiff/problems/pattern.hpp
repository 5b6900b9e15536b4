#ifndef PROXDIFF_PROBLEMS_PATTERN_HPP
#define PROXDIFF_PROBLEMS_PATTERN_HPP

#include <vector>

#include "proxdiff/core/vec.hpp"

namespace proxdiff {

// The identified active manifold of a point: which rows of the N x L variable
// are nonzero. For L == 1 this is the plain support; the tangent space is the
// subspace of vectors supported on the same rows.
struct ActivePattern {
  enum class Kind { kEntrywise, kRowwise };
  Kind kind = Kind::kEntrywise;
  std::vector<bool> mask;  // per row, length N
  int cols = 1;            // L

  int dim_tangent() const {
    int rows = 0;
    for (bool b : mask)
      if (b) ++rows;
    return rows * cols;
  }
  int active_rows() const {
    int rows = 0;
    for (bool b : mask)
      if (b) ++rows;
    return rows;
  }

  // Projection onto the tangent space: zero the inactive rows.
  Vec project(const Vec& v) const;

  bool operator==(const ActivePattern& other) const {
    return mask == other.mask && cols == other.cols;
  }
};

}  // namespace proxdiff

#endif
