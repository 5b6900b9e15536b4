#include "proxdiff/problems/nonsmooth.hpp"

#include <cmath>
#include <stdexcept>

#include "proxdiff/problems/pattern.hpp"

namespace proxdiff {

namespace {

double row_norm(const Vec& x, int r, int cols) {
  double s = 0.0;
  const double* p = x.data() + static_cast<std::size_t>(r) * cols;
  for (int c = 0; c < cols; ++c) s += p[c] * p[c];
  return std::sqrt(s);
}

double row_dot(const Vec& a, const Vec& b, int r, int cols) {
  double s = 0.0;
  const std::size_t off = static_cast<std::size_t>(r) * cols;
  for (int c = 0; c < cols; ++c) s += a[off + c] * b[off + c];
  return s;
}

double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

}  // namespace

Vec ActivePattern::project(const Vec& v) const {
  if (static_cast<int>(v.size()) != static_cast<int>(mask.size()) * cols)
    throw std::invalid_argument("ActivePattern::project: dimension mismatch");
  Vec out(v.size(), 0.0);
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    const std::size_t off = r * cols;
    for (int c = 0; c < cols; ++c) out[off + c] = v[off + c];
  }
  return out;
}

NonsmoothTerm::NonsmoothTerm(int rows, int cols, double weight)
    : rows_(rows), cols_(cols), weight_(weight) {
  if (rows < 0 || cols < 1) throw std::invalid_argument("NonsmoothTerm: bad shape");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("NonsmoothTerm: weight must be finite and nonnegative");
}

double NonsmoothTerm::value(const Vec& x) const {
  double s = 0.0;
  for (int r = 0; r < rows_; ++r) s += row_norm(x, r, cols_);
  return weight_ * s;
}

Vec NonsmoothTerm::prox(const Vec& w, double alpha) const {
  if (alpha < 0.0) throw std::invalid_argument("prox: negative step");
  if (static_cast<int>(w.size()) != dim()) throw std::invalid_argument("prox: dimension mismatch");
  const double t = alpha * weight_;
  Vec out(w.size(), 0.0);
  for (int r = 0; r < rows_; ++r) {
    const double s = row_norm(w, r, cols_);
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    if (s <= t) continue;  // shrunk to zero exactly
    if (cols_ == 1) {
      out[off] = sign(w[off]) * (s - t);
    } else {
      const double factor = 1.0 - t / s;
      for (int c = 0; c < cols_; ++c) out[off + c] = factor * w[off + c];
    }
  }
  return out;
}

Vec NonsmoothTerm::prox_jvp(const Vec& w, double alpha, const Vec& dw, double dlambda) const {
  if (static_cast<int>(w.size()) != dim() || dw.size() != w.size())
    throw std::invalid_argument("prox_jvp: dimension mismatch");
  if (weight_ == 0.0 && dlambda == 0.0) return dw;  // prox is the identity
  const double t = alpha * weight_;
  const double dt = alpha * dlambda;
  Vec out(w.size(), 0.0);
  for (int r = 0; r < rows_; ++r) {
    const double s = row_norm(w, r, cols_);
    if (s <= t || s == 0.0) continue;  // inactive rows carry zero derivative
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    if (cols_ == 1) {
      out[off] = dw[off] - sign(w[off]) * dt;
    } else {
      const double factor = 1.0 - t / s;
      const double wdw = row_dot(w, dw, r, cols_);
      const double radial = t * wdw / (s * s * s);
      for (int c = 0; c < cols_; ++c)
        out[off + c] = factor * dw[off + c] + radial * w[off + c] - (w[off + c] / s) * dt;
    }
  }
  return out;
}

Vec NonsmoothTerm::prox_vjp_w(const Vec& w, double alpha, const Vec& vbar) const {
  // D_w prox is block-diagonal with symmetric row blocks, so the transpose
  // action coincides with the forward action on vbar.
  return prox_jvp(w, alpha, vbar, 0.0);
}

double NonsmoothTerm::prox_vjp_lambda(const Vec& w, double alpha, const Vec& vbar) const {
  if (static_cast<int>(w.size()) != dim() || vbar.size() != w.size())
    throw std::invalid_argument("prox_vjp_lambda: dimension mismatch");
  const double t = alpha * weight_;
  double acc = 0.0;
  for (int r = 0; r < rows_; ++r) {
    const double s = row_norm(w, r, cols_);
    if (s <= t || s == 0.0) continue;
    acc -= row_dot(w, vbar, r, cols_) / s;
  }
  return alpha * acc;
}

Vec NonsmoothTerm::subgrad_project(const Vec& x, const Vec& v) const {
  if (static_cast<int>(x.size()) != dim() || v.size() != x.size())
    throw std::invalid_argument("subgrad_project: dimension mismatch");
  Vec out(v.size(), 0.0);
  const ActivePattern pat = pattern(x);
  for (int r = 0; r < rows_; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    if (pat.mask[r]) {
      const double s = row_norm(x, r, cols_);
      for (int c = 0; c < cols_; ++c) out[off + c] = weight_ * x[off + c] / s;
    } else {
      const double vs = row_norm(v, r, cols_);
      const double factor = vs > weight_ ? weight_ / vs : 1.0;
      for (int c = 0; c < cols_; ++c) out[off + c] = factor * v[off + c];
    }
  }
  return out;
}

bool NonsmoothTerm::subgrad_contains(const Vec& x, const Vec& v, double tol) const {
  const ActivePattern pat = pattern(x);
  for (int r = 0; r < rows_; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    if (pat.mask[r]) {
      const double s = row_norm(x, r, cols_);
      for (int c = 0; c < cols_; ++c)
        if (std::abs(v[off + c] - weight_ * x[off + c] / s) > tol) return false;
    } else {
      if (row_norm(v, r, cols_) > weight_ + tol) return false;
    }
  }
  return true;
}

ActivePattern NonsmoothTerm::pattern(const Vec& x, double atol) const {
  if (atol < 0.0) throw std::invalid_argument("pattern: negative tolerance");
  ActivePattern pat;
  pat.kind = cols_ == 1 ? ActivePattern::Kind::kEntrywise : ActivePattern::Kind::kRowwise;
  pat.cols = cols_;
  pat.mask.resize(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) pat.mask[static_cast<std::size_t>(r)] = row_norm(x, r, cols_) > atol;
  return pat;
}

int NonsmoothTerm::kink_rows(const Vec& w, double alpha) const {
  if (weight_ == 0.0) return 0;
  const double t = alpha * weight_;
  int hits = 0;
  for (int r = 0; r < rows_; ++r)
    if (row_norm(w, r, cols_) == t) ++hits;
  return hits;
}

Vec NonsmoothTerm::riem_grad(const Vec& x, const ActivePattern& pat) const {
  Vec out(x.size(), 0.0);
  for (int r = 0; r < rows_; ++r) {
    if (!pat.mask[static_cast<std::size_t>(r)]) continue;
    const double s = row_norm(x, r, cols_);
    if (s == 0.0) continue;
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    for (int c = 0; c < cols_; ++c) out[off + c] = weight_ * x[off + c] / s;
  }
  return out;
}

Vec NonsmoothTerm::riem_hess_apply(const Vec& x, const ActivePattern& pat, const Vec& v) const {
  Vec out(x.size(), 0.0);
  if (cols_ == 1) return out;  // the entrywise norm is flat along its manifold
  for (int r = 0; r < rows_; ++r) {
    if (!pat.mask[static_cast<std::size_t>(r)]) continue;
    const double s = row_norm(x, r, cols_);
    if (s == 0.0) continue;
    const double xv = row_dot(x, v, r, cols_);
    const std::size_t off = static_cast<std::size_t>(r) * cols_;
    for (int c = 0; c < cols_; ++c)
      out[off + c] = weight_ * (v[off + c] / s - xv * x[off + c] / (s * s * s));
  }
  return out;
}

Vec l1_prox(const Vec& w, double t) {
  if (t < 0.0) throw std::invalid_argument("l1_prox: negative threshold");
  NonsmoothTerm term(static_cast<int>(w.size()), 1, t);
  return term.prox(w, 1.0);
}

Vec l1_prox_jvp(const Vec& w, double t, const Vec& dw, double dt) {
  if (t < 0.0) throw std::invalid_argument("l1_prox_jvp: negative threshold");
  NonsmoothTerm term(static_cast<int>(w.size()), 1, t);
  return term.prox_jvp(w, 1.0, dw, dt);
}

Vec group_prox(const Vec& w, int cols, double t) {
  if (t < 0.0) throw std::invalid_argument("group_prox: negative threshold");
  if (cols < 1 || w.size() % cols != 0) throw std::invalid_argument("group_prox: bad shape");
  NonsmoothTerm term(static_cast<int>(w.size()) / cols, cols, t);
  return term.prox(w, 1.0);
}

Vec group_prox_jvp(const Vec& w, int cols, double t, const Vec& dw, double dt) {
  if (t < 0.0) throw std::invalid_argument("group_prox_jvp: negative threshold");
  if (cols < 1 || w.size() % cols != 0) throw std::invalid_argument("group_prox_jvp: bad shape");
  NonsmoothTerm term(static_cast<int>(w.size()) / cols, cols, t);
  return term.prox_jvp(w, 1.0, dw, dt);
}

}  // namespace proxdiff
