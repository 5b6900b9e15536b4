#include "proxdiff/core/dense_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace proxdiff {

DenseMatrix::DenseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("DenseMatrix: negative dimension");
}

DenseMatrix::DenseMatrix(int rows, int cols, Vec entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("DenseMatrix: negative dimension");
  if (entries_.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("DenseMatrix: entry count does not match dimensions");
  if (!all_finite(entries_))
    throw std::invalid_argument("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(const Vec& d) {
  DenseMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Vec DenseMatrix::apply(const Vec& x) const {
  if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("apply: size mismatch");
  Vec y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + static_cast<std::size_t>(i) * cols_;
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec DenseMatrix::apply_transpose(const Vec& x) const {
  if (static_cast<int>(x.size()) != rows_) throw std::invalid_argument("apply_transpose: size mismatch");
  Vec y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + static_cast<std::size_t>(i) * cols_;
    const double xi = x[i];
    for (int j = 0; j < cols_; ++j) y[j] += row[j] * xi;
  }
  return y;
}

Vec DenseMatrix::apply_block(const Vec& x, int l) const {
  if (static_cast<int>(x.size()) != cols_ * l) throw std::invalid_argument("apply_block: size mismatch");
  Vec y(static_cast<std::size_t>(rows_) * l, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + static_cast<std::size_t>(i) * cols_;
    double* out = y.data() + static_cast<std::size_t>(i) * l;
    for (int j = 0; j < cols_; ++j) {
      const double a = row[j];
      const double* xr = x.data() + static_cast<std::size_t>(j) * l;
      for (int c = 0; c < l; ++c) out[c] += a * xr[c];
    }
  }
  return y;
}

Vec DenseMatrix::apply_transpose_block(const Vec& x, int l) const {
  if (static_cast<int>(x.size()) != rows_ * l) throw std::invalid_argument("apply_transpose_block: size mismatch");
  Vec y(static_cast<std::size_t>(cols_) * l, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + static_cast<std::size_t>(i) * cols_;
    const double* xr = x.data() + static_cast<std::size_t>(i) * l;
    for (int j = 0; j < cols_; ++j) {
      const double a = row[j];
      double* out = y.data() + static_cast<std::size_t>(j) * l;
      for (int c = 0; c < l; ++c) out[c] += a * xr[c];
    }
  }
  return y;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

DenseMatrix DenseMatrix::matmul(const DenseMatrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("matmul: inner dimension mismatch");
  DenseMatrix r(rows_, other.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double a = at(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < other.cols_; ++j) r.at(i, j) += a * other.at(k, j);
    }
  }
  return r;
}

DenseMatrix DenseMatrix::gram() const {
  DenseMatrix g(cols_, cols_);
  for (int i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + static_cast<std::size_t>(i) * cols_;
    for (int a = 0; a < cols_; ++a) {
      const double ra = row[a];
      if (ra == 0.0) continue;
      for (int b = 0; b < cols_; ++b) g.at(a, b) += ra * row[b];
    }
  }
  return g;
}

DenseMatrix& DenseMatrix::operator*=(double c) {
  for (double& v : entries_) v *= c;
  return *this;
}

DenseMatrix& DenseMatrix::add_scaled(const DenseMatrix& other, double c) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += c * other.entries_[i];
  return *this;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace proxdiff
