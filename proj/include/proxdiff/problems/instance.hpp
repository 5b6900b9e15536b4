#ifndef PROXDIFF_PROBLEMS_INSTANCE_HPP
#define PROXDIFF_PROBLEMS_INSTANCE_HPP

#include "proxdiff/problems/nonsmooth.hpp"
#include "proxdiff/problems/param_pack.hpp"
#include "proxdiff/problems/smooth.hpp"

namespace proxdiff {

// A parameterized composite problem: smooth data term plus rowwise-norm
// regularizer, both induced by the same parameter pack.
struct ProblemInstance {
  ParamPack u;
  SmoothTerm f;
  NonsmoothTerm g;

  int dim() const { return g.dim(); }
  int var_rows() const { return g.rows(); }
  int var_cols() const { return g.cols(); }

  double objective(const Vec& x) const { return f.value(x) + g.value(x); }
};

ProblemInstance make_lasso_instance(ParamPack u);        // L == 1
ProblemInstance make_group_lasso_instance(ParamPack u);  // any L
// Smooth-only instance (regularizer weight forced to zero).
ProblemInstance make_smooth_instance(ParamPack u);

}  // namespace proxdiff

#endif
