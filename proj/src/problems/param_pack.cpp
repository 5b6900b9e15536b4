#include "proxdiff/problems/param_pack.hpp"

#include <stdexcept>

namespace proxdiff {

ParamPack::ParamPack(DenseMatrix a, DenseMatrix b, double lambda)
    : design(std::move(a)), target(std::move(b)), reg_weight(lambda) {
  if (design.rows() != target.rows())
    throw std::invalid_argument("ParamPack: design and target row counts differ");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ParamPack: reg_weight must be finite and nonnegative");
}

ParamDelta ParamDelta::zeros_like(const ParamPack& u) {
  ParamDelta d;
  d.d_design = DenseMatrix(u.design.rows(), u.design.cols());
  d.d_target = DenseMatrix(u.target.rows(), u.target.cols());
  d.d_reg_weight = 0.0;
  return d;
}

ParamDelta ParamDelta::lambda_direction(const ParamPack& u, double dlambda) {
  ParamDelta d = zeros_like(u);
  d.d_reg_weight = dlambda;
  return d;
}

ParamDelta& ParamDelta::add_scaled(const ParamDelta& other, double c) {
  d_design.add_scaled(other.d_design, c);
  d_target.add_scaled(other.d_target, c);
  d_reg_weight += c * other.d_reg_weight;
  return *this;
}

double dot(const ParamDelta& a, const ParamDelta& b) {
  return dot(a.d_design, b.d_design) + dot(a.d_target, b.d_target) +
         a.d_reg_weight * b.d_reg_weight;
}

double norm2(const ParamDelta& a) { return std::sqrt(dot(a, a)); }

ParamDelta sub(const ParamDelta& a, const ParamDelta& b) {
  ParamDelta d = a;
  d.add_scaled(b, -1.0);
  return d;
}

}  // namespace proxdiff
