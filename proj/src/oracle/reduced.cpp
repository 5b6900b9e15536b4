#include "proxdiff/oracle/reduced.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "proxdiff/core/spectral.hpp"
#include "proxdiff/oracle/cg.hpp"

namespace proxdiff {

namespace {

std::vector<int> active_rows(const ActivePattern& pat) {
  std::vector<int> rows;
  for (std::size_t r = 0; r < pat.mask.size(); ++r)
    if (pat.mask[r]) rows.push_back(static_cast<int>(r));
  return rows;
}

// Unit rowwise directions x_r / ||x_r|| of the active rows, in full space.
Vec unit_row_directions(const ProblemInstance& problem, const Vec& x_star,
                        const ActivePattern& pat) {
  const int cols = problem.var_cols();
  Vec dir(x_star.size(), 0.0);
  for (std::size_t r = 0; r < pat.mask.size(); ++r) {
    if (!pat.mask[r]) continue;
    const std::size_t off = r * cols;
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += x_star[off + c] * x_star[off + c];
    s = std::sqrt(s);
    if (s == 0.0) continue;
    for (int c = 0; c < cols; ++c) dir[off + c] = x_star[off + c] / s;
  }
  return dir;
}

}  // namespace

Vec pattern_restrict(const ActivePattern& pat, const Vec& full) {
  Vec out;
  out.reserve(static_cast<std::size_t>(pat.dim_tangent()));
  for (std::size_t r = 0; r < pat.mask.size(); ++r) {
    if (!pat.mask[r]) continue;
    const std::size_t off = r * pat.cols;
    for (int c = 0; c < pat.cols; ++c) out.push_back(full[off + c]);
  }
  return out;
}

Vec pattern_embed(const ActivePattern& pat, const Vec& reduced) {
  Vec out(pat.mask.size() * pat.cols, 0.0);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < pat.mask.size(); ++r) {
    if (!pat.mask[r]) continue;
    const std::size_t off = r * pat.cols;
    for (int c = 0; c < pat.cols; ++c) out[off + c] = reduced[idx++];
  }
  return out;
}

ReducedSystem build_reduced_system(const ProblemInstance& problem, const Vec& x_star,
                                   const ParamDelta& du) {
  if (static_cast<int>(x_star.size()) != problem.dim())
    throw std::invalid_argument("build_reduced_system: dimension mismatch");
  ReducedSystem sys;
  sys.pattern = problem.g.pattern(x_star);
  const std::vector<int> rows = active_rows(sys.pattern);
  const int cols = problem.var_cols();
  const int td = static_cast<int>(rows.size()) * cols;

  if (td == 0) {
    sys.hessian_reduced = DenseMatrix(0, 0);
    sys.min_eigenvalue = 0.0;
    return sys;
  }

  // Data-term block: (A^T A)_{r r'} acting identically on each of the L
  // columns, assembled independently of the solver's own Gram cache.
  const DenseMatrix gram = problem.u.design.gram();
  DenseMatrix h(td, td);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const double gab = gram.at(rows[a], rows[b]);
      for (int c = 0; c < cols; ++c)
        h.at(static_cast<int>(a) * cols + c, static_cast<int>(b) * cols + c) += gab;
    }
  }
  // Curvature of the rowwise norm along active rows (zero when L == 1):
  // weight * (I/s - x x^T / s^3) per row.
  if (cols > 1 && problem.g.weight() > 0.0) {
    const double lambda = problem.g.weight();
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const std::size_t off = static_cast<std::size_t>(rows[a]) * cols;
      double s2 = 0.0;
      for (int c = 0; c < cols; ++c) s2 += x_star[off + c] * x_star[off + c];
      const double s = std::sqrt(s2);
      for (int c = 0; c < cols; ++c) {
        for (int d = 0; d < cols; ++d) {
          const double entry =
              lambda * ((c == d ? 1.0 / s : 0.0) - x_star[off + c] * x_star[off + d] / (s2 * s));
          h.at(static_cast<int>(a) * cols + c, static_cast<int>(a) * cols + d) += entry;
        }
      }
    }
  }
  sys.hessian_reduced = std::move(h);

  // rhs: derivative in u of the tangent gradient along du. The data part is
  // the restricted cross derivative; the norm part contributes its unit row
  // directions scaled by the weight perturbation.
  Vec rhs_full = problem.f.cross_jvp(x_star, du);
  if (du.d_reg_weight != 0.0)
    axpy(rhs_full, du.d_reg_weight, unit_row_directions(problem, x_star, sys.pattern));
  sys.rhs_jvp = pattern_restrict(sys.pattern, rhs_full);

  sys.min_eigenvalue = symmetric_min_eigenvalue(sys.hessian_reduced);
  if (!(sys.min_eigenvalue > 1e-12 * (1.0 + sys.hessian_reduced.max_abs())))
    throw std::runtime_error(
        "build_reduced_system: reduced Hessian is numerically singular; the restricted "
        "positive-definiteness condition fails at this point");
  return sys;
}

Vec solve_dpsi_jvp(const ReducedSystem& sys, double tol) {
  if (sys.pattern.dim_tangent() == 0) return Vec(sys.pattern.mask.size() * sys.pattern.cols, 0.0);
  const DenseMatrix& h = sys.hessian_reduced;
  CgResult cg = conjugate_gradient([&h](const Vec& v) { return h.apply(v); }, sys.rhs_jvp, tol,
                                   10 * h.rows() + 50);
  if (!cg.converged && !(cg.rel_residual < 1e-8))
    throw std::runtime_error("solve_dpsi_jvp: conjugate gradient failed to converge");
  scale(cg.x, -1.0);
  return pattern_embed(sys.pattern, cg.x);
}

ParamDelta solve_dpsi_vjp(const ProblemInstance& problem, const Vec& x_star, const Vec& xbar,
                          double tol) {
  if (xbar.size() != x_star.size())
    throw std::invalid_argument("solve_dpsi_vjp: dimension mismatch");
  ReducedSystem sys = build_reduced_system(problem, x_star, ParamDelta::zeros_like(problem.u));
  if (sys.pattern.dim_tangent() == 0) return ParamDelta::zeros_like(problem.u);

  const Vec xbar_t = pattern_restrict(sys.pattern, xbar);
  const DenseMatrix& h = sys.hessian_reduced;
  CgResult cg = conjugate_gradient([&h](const Vec& v) { return h.apply(v); }, xbar_t, tol,
                                   10 * h.rows() + 50);
  if (!cg.converged && !(cg.rel_residual < 1e-8))
    throw std::runtime_error("solve_dpsi_vjp: conjugate gradient failed to converge");
  const Vec z = pattern_embed(sys.pattern, cg.x);

  // ubar . du = -<z, D_u (tangent gradient) du> for every du.
  ParamDelta ubar = problem.f.cross_vjp(x_star, z);
  ubar.d_design *= -1.0;
  ubar.d_target *= -1.0;
  ubar.d_reg_weight = -dot(z, unit_row_directions(problem, x_star, sys.pattern));
  return ubar;
}

}  // namespace proxdiff
