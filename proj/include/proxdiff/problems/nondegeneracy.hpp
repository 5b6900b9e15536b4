#ifndef PROXDIFF_PROBLEMS_NONDEGENERACY_HPP
#define PROXDIFF_PROBLEMS_NONDEGENERACY_HPP

#include "proxdiff/problems/instance.hpp"

namespace proxdiff {

struct NondegeneracyReport {
  bool ok = false;
  double min_gap = 0.0;  // 1 - largest off-support dual magnitude
};

// Checks strict dual feasibility at an (approximate) solution: the entries
// (rows) of v = A^T(B - A X*) / lambda off the support of x_star must have
// magnitude (row norm) at most 1 - margin. A solution with no zero rows
// passes vacuously with min_gap = 1.
NondegeneracyReport check_nondegeneracy(const ProblemInstance& problem, const Vec& x_star,
                                        double margin);

}  // namespace proxdiff

#endif
