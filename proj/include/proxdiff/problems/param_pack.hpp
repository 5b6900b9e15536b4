#ifndef PROXDIFF_PROBLEMS_PARAM_PACK_HPP
#define PROXDIFF_PROBLEMS_PARAM_PACK_HPP

#include <cmath>

#include "proxdiff/core/dense_matrix.hpp"

namespace proxdiff {

// Parameters u = (A, B, lambda) of the regularized least-squares family.
// B has one column for the vector-target problem and L columns for the
// shared-support multi-target problem; the variable lives in R^(N*L), flat
// row-major with row r occupying [r*L, (r+1)*L).
struct ParamPack {
  DenseMatrix design;   // A, M x N
  DenseMatrix target;   // B, M x L
  double reg_weight;    // lambda; 0 switches the nonsmooth term off entirely

  ParamPack(DenseMatrix a, DenseMatrix b, double lambda);

  int m() const { return design.rows(); }
  int n() const { return design.cols(); }
  int l() const { return target.cols(); }
};

// A perturbation or gradient accumulator shaped like ParamPack; the same
// struct serves as tangent (u-dot) and cotangent (u-bar).
struct ParamDelta {
  DenseMatrix d_design;  // M x N
  DenseMatrix d_target;  // M x L
  double d_reg_weight = 0.0;

  static ParamDelta zeros_like(const ParamPack& u);
  static ParamDelta lambda_direction(const ParamPack& u, double dlambda = 1.0);

  ParamDelta& add_scaled(const ParamDelta& other, double c);
};

double dot(const ParamDelta& a, const ParamDelta& b);
double norm2(const ParamDelta& a);
ParamDelta sub(const ParamDelta& a, const ParamDelta& b);

}  // namespace proxdiff

#endif
