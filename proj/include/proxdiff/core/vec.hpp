#ifndef PROXDIFF_CORE_VEC_HPP
#define PROXDIFF_CORE_VEC_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace proxdiff {

using Vec = std::vector<double>;

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += c * x
inline void axpy(Vec& y, double c, const Vec& x) {
  if (y.size() != x.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline void scale(Vec& x, double c) {
  for (double& v : x) v *= c;
}

inline Vec scaled(const Vec& x, double c) {
  Vec y(x);
  scale(y, c);
  return y;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec y(a);
  axpy(y, 1.0, b);
  return y;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec y(a);
  axpy(y, -1.0, b);
  return y;
}

// a*x + b*y, elementwise
inline Vec lincomb(double a, const Vec& x, double b, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("lincomb: size mismatch");
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b * y[i];
  return z;
}

inline bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace proxdiff

#endif
