#ifndef PROXDIFF_CORE_DENSE_MATRIX_HPP
#define PROXDIFF_CORE_DENSE_MATRIX_HPP

#include <cstddef>
#include <vector>

#include "proxdiff/core/vec.hpp"

namespace proxdiff {

// Row-major dense matrix of doubles. Constructors reject non-finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols);                       // zero-initialized
  DenseMatrix(int rows, int cols, Vec entries);          // takes ownership

  static DenseMatrix identity(int n);
  static DenseMatrix diagonal(const Vec& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }

  const Vec& entries() const { return entries_; }
  Vec& entries_mut() { return entries_; }

  Vec apply(const Vec& x) const;             // M x
  Vec apply_transpose(const Vec& x) const;   // M^T x

  // M X for X stored as a flat rows()-compatible (n x l) block, i.e. this is
  // (rows x cols) and x holds a (cols x l) row-major block; result (rows x l).
  Vec apply_block(const Vec& x, int l) const;
  Vec apply_transpose_block(const Vec& x, int l) const;

  DenseMatrix transpose() const;
  DenseMatrix matmul(const DenseMatrix& other) const;
  DenseMatrix gram() const;  // M^T M

  DenseMatrix& operator*=(double c);
  DenseMatrix& add_scaled(const DenseMatrix& other, double c);

  double frobenius_norm() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec entries_;
};

inline double dot(const DenseMatrix& a, const DenseMatrix& b) {
  return dot(a.entries(), b.entries());
}

}  // namespace proxdiff

#endif
