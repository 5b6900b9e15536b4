#include "proxdiff/problems/instance.hpp"

#include <stdexcept>

namespace proxdiff {

ProblemInstance make_group_lasso_instance(ParamPack u) {
  SmoothTerm f = least_squares_smooth(u);
  NonsmoothTerm g(u.n(), u.l(), u.reg_weight);
  return ProblemInstance{std::move(u), std::move(f), std::move(g)};
}

ProblemInstance make_lasso_instance(ParamPack u) {
  if (u.l() != 1) throw std::invalid_argument("make_lasso_instance: target must have one column");
  return make_group_lasso_instance(std::move(u));
}

ProblemInstance make_smooth_instance(ParamPack u) {
  u.reg_weight = 0.0;
  return make_group_lasso_instance(std::move(u));
}

}  // namespace proxdiff
