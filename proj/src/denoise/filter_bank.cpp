#include "proxdiff/denoise/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace proxdiff::denoise {

double Kernel::abs_sum() const {
  double s = 0.0;
  for (double t : taps) s += std::abs(t);
  return s;
}

std::vector<Kernel> dct_basis_5x5() {
  constexpr int n = 5;
  // Orthonormal cosine-II rows: d[p][i] = c_p cos(pi (2i+1) p / (2n)).
  double d[n][n];
  for (int p = 0; p < n; ++p) {
    const double cp = p == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i)
      d[p][i] = cp * std::cos(M_PI * (2.0 * i + 1.0) * p / (2.0 * n));
  }
  std::vector<Kernel> basis;
  basis.reserve(n * n - 1);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == 0 && q == 0) continue;  // drop the constant kernel
      Kernel k;
      k.radius = 2;
      k.taps.assign(n * n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k.at(i - 2, j - 2) = d[p][i] * d[q][j];
      basis.push_back(std::move(k));
    }
  }
  return basis;
}

Field Field::zeros(int width, int height, int channels, int n_filters) {
  if (width <= 0 || height <= 0 || channels <= 0 || n_filters <= 0)
    throw std::invalid_argument("Field::zeros: bad shape");
  Field f;
  f.width = width;
  f.height = height;
  f.channels = channels;
  f.n_filters = n_filters;
  f.values.assign(static_cast<std::size_t>(width) * height * channels * n_filters, 0.0);
  return f;
}

void kernel_apply(const Kernel& k, const Image& img, Field& out, int f) {
  if (img.width < 2 * k.radius + 1 || img.height < 2 * k.radius + 1)
    throw std::invalid_argument("kernel_apply: image smaller than kernel");
  const int w = img.width, h = img.height, r = k.radius;
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -r; dx <= r; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            s += k.at(dy, dx) * img.at(xx, yy, c);
          }
        }
        out.at(x, y, c, f) = s;
      }
    }
  }
}

void kernel_adjoint_accumulate(const Kernel& k, const Field& field, int f, Image& out) {
  if (out.width < 2 * k.radius + 1 || out.height < 2 * k.radius + 1)
    throw std::invalid_argument("kernel_adjoint_accumulate: image smaller than kernel");
  const int w = out.width, h = out.height, r = k.radius;
  for (int c = 0; c < out.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = field.at(x, y, c, f);
        if (v == 0.0) continue;
        for (int dy = -r; dy <= r; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -r; dx <= r; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            out.at(xx, yy, c) += k.at(dy, dx) * v;
          }
        }
      }
    }
  }
}

Image kernel_apply_image(const Kernel& k, const Image& img) {
  Field tmp = Field::zeros(img.width, img.height, img.channels, 1);
  kernel_apply(k, img, tmp, 0);
  Image out = Image::zeros(img.width, img.height, img.channels);
  out.values = std::move(tmp.values);
  return out;
}

Image kernel_adjoint_image(const Kernel& k, const Image& img) {
  Field tmp;
  tmp.width = img.width;
  tmp.height = img.height;
  tmp.channels = img.channels;
  tmp.n_filters = 1;
  tmp.values = img.values;
  Image out = Image::zeros(img.width, img.height, img.channels);
  kernel_adjoint_accumulate(k, tmp, 0, out);
  return out;
}

FilterBank::FilterBank(std::vector<Kernel> basis_in, DenseMatrix weights_in)
    : basis(std::move(basis_in)), weights(std::move(weights_in)) {
  if (weights.cols() != static_cast<int>(basis.size()))
    throw std::invalid_argument("FilterBank: weight columns must match basis count");
  if (basis.empty()) throw std::invalid_argument("FilterBank: empty basis");
}

std::vector<Kernel> FilterBank::kernels() const {
  std::vector<Kernel> out(static_cast<std::size_t>(n_filters()));
  for (int f = 0; f < n_filters(); ++f) {
    Kernel k;
    k.radius = basis[0].radius;
    k.taps.assign(basis[0].taps.size(), 0.0);
    for (int s = 0; s < n_basis(); ++s) {
      const double wgt = weights.at(f, s);
      for (std::size_t i = 0; i < k.taps.size(); ++i) k.taps[i] += wgt * basis[s].taps[i];
    }
    out[static_cast<std::size_t>(f)] = std::move(k);
  }
  return out;
}

double FilterBank::op_norm_bound_sq() const {
  double total = 0.0;
  for (const Kernel& k : kernels()) {
    const double s = k.abs_sum();
    total += s * s;
  }
  return total;
}

Field conv_apply(const FilterBank& bank, const Image& img) {
  Field out = Field::zeros(img.width, img.height, img.channels, bank.n_filters());
  const std::vector<Kernel> ks = bank.kernels();
  for (int f = 0; f < bank.n_filters(); ++f) kernel_apply(ks[static_cast<std::size_t>(f)], img, out, f);
  return out;
}

Image conv_adjoint(const FilterBank& bank, const Field& field) {
  if (field.n_filters != bank.n_filters())
    throw std::invalid_argument("conv_adjoint: filter count mismatch");
  Image out = Image::zeros(field.width, field.height, field.channels);
  const std::vector<Kernel> ks = bank.kernels();
  for (int f = 0; f < bank.n_filters(); ++f)
    kernel_adjoint_accumulate(ks[static_cast<std::size_t>(f)], field, f, out);
  return out;
}

}  // namespace proxdiff::denoise
