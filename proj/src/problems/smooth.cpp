#include "proxdiff/problems/smooth.hpp"

#include <memory>
#include <stdexcept>

#include "proxdiff/core/spectral.hpp"

namespace proxdiff {

namespace {

// Shared state captured by the closures of one term.
struct LsState {
  DenseMatrix a;      // M x N
  DenseMatrix b;      // M x L
  DenseMatrix gram;   // A^T A, N x N
  int l;
};

}  // namespace

SmoothTerm least_squares_smooth(const ParamPack& u) {
  auto st = std::make_shared<LsState>();
  st->a = u.design;
  st->b = u.target;
  st->gram = u.design.gram();
  st->l = u.l();
  const int n = u.n();
  const int l = u.l();
  const int dim = n * l;

  SmoothTerm term;
  term.lipschitz = spectral_radius(st->gram);

  term.value = [st, dim](const Vec& x) {
    if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("value: dimension mismatch");
    Vec r = st->a.apply_block(x, st->l);
    axpy(r, -1.0, st->b.entries());
    return 0.5 * dot(r, r);
  };

  term.grad = [st, dim](const Vec& x) {
    if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("grad: dimension mismatch");
    Vec r = st->a.apply_block(x, st->l);
    axpy(r, -1.0, st->b.entries());
    return st->a.apply_transpose_block(r, st->l);
  };

  term.hvp = [st, dim](const Vec& /*at*/, const Vec& v) {
    if (static_cast<int>(v.size()) != dim) throw std::invalid_argument("hvp: dimension mismatch");
    return st->gram.apply_block(v, st->l);
  };

  term.cross_jvp = [st, dim](const Vec& x, const ParamDelta& du) {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("cross_jvp: dimension mismatch");
    // d/du of A^T (A x - B) along (dA, dB):
    //   dA^T (A x - B) + A^T dA x - A^T dB.
    Vec r = st->a.apply_block(x, st->l);
    axpy(r, -1.0, st->b.entries());
    Vec out = du.d_design.apply_transpose_block(r, st->l);
    Vec ax = du.d_design.apply_block(x, st->l);
    axpy(ax, -1.0, du.d_target.entries());
    axpy(out, 1.0, st->a.apply_transpose_block(ax, st->l));
    return out;
  };

  term.cross_vjp = [st, u, dim](const Vec& x, const Vec& vbar) {
    if (static_cast<int>(x.size()) != dim || vbar.size() != x.size())
      throw std::invalid_argument("cross_vjp: dimension mismatch");
    ParamDelta out = ParamDelta::zeros_like(u);
    // <vbar, dA^T R> = <dA, R V^T>, <vbar, A^T dA x> = <dA, (A V) X^T>,
    // <vbar, -A^T dB> = <dB, -A V>, with V = mat(vbar), X = mat(x), R = AX-B.
    Vec r = st->a.apply_block(x, st->l);
    axpy(r, -1.0, st->b.entries());
    Vec av = st->a.apply_block(vbar, st->l);  // M*L
    const int m = st->a.rows();
    const int n = st->a.cols();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int c = 0; c < st->l; ++c) {
          s += r[static_cast<std::size_t>(i) * st->l + c] * vbar[static_cast<std::size_t>(j) * st->l + c];
          s += av[static_cast<std::size_t>(i) * st->l + c] * x[static_cast<std::size_t>(j) * st->l + c];
        }
        out.d_design.at(i, j) = s;
      }
    }
    for (std::size_t i = 0; i < av.size(); ++i) out.d_target.entries_mut()[i] = -av[i];
    out.d_reg_weight = 0.0;
    return out;
  };

  return term;
}

SmoothTerm lasso_smooth(const ParamPack& u) {
  if (u.l() != 1) throw std::invalid_argument("lasso_smooth: target must have one column");
  return least_squares_smooth(u);
}

}  // namespace proxdiff
