#ifndef PROXDIFF_DENOISE_FILTER_BANK_HPP
#define PROXDIFF_DENOISE_FILTER_BANK_HPP

#include <vector>

#include "proxdiff/core/dense_matrix.hpp"
#include "proxdiff/denoise/image.hpp"

namespace proxdiff::denoise {

// Square odd-sized convolution kernel.
struct Kernel {
  int radius = 0;  // size (2*radius+1)^2
  Vec taps;        // row-major

  double& at(int dy, int dx) {
    return taps[static_cast<std::size_t>(dy + radius) * (2 * radius + 1) + (dx + radius)];
  }
  double at(int dy, int dx) const {
    return taps[static_cast<std::size_t>(dy + radius) * (2 * radius + 1) + (dx + radius)];
  }
  double abs_sum() const;
};

// The 24 tensor-product cosine-transform kernels on a 5x5 patch with the
// constant kernel removed; orthonormal under the Frobenius inner product and
// each summing to zero.
std::vector<Kernel> dct_basis_5x5();

// Stack of per-pixel filter responses: values[((f*channels + c)*height + y)*width + x].
struct Field {
  int width = 0, height = 0, channels = 1, n_filters = 0;
  Vec values;

  static Field zeros(int width, int height, int channels, int n_filters);
  double& at(int x, int y, int c, int f) {
    return values[((static_cast<std::size_t>(f) * channels + c) * height + y) * width + x];
  }
  double at(int x, int y, int c, int f) const {
    return values[((static_cast<std::size_t>(f) * channels + c) * height + y) * width + x];
  }
  std::size_t size() const { return values.size(); }
};

// Correlation with replicate-edge (Neumann) boundary handling, one output
// channel per input channel, and its exact adjoint (same taps, scattered).
void kernel_apply(const Kernel& k, const Image& img, Field& out, int f);
void kernel_adjoint_accumulate(const Kernel& k, const Field& field, int f, Image& out);
Image kernel_apply_image(const Kernel& k, const Image& img);         // single-slot convenience
Image kernel_adjoint_image(const Kernel& k, const Image& img);

// Learned filters K_f = sum_s weights(f,s) basis_s.
struct FilterBank {
  std::vector<Kernel> basis;  // N_b kernels
  DenseMatrix weights;        // N_f x N_b

  FilterBank(std::vector<Kernel> basis_in, DenseMatrix weights_in);
  int n_filters() const { return weights.rows(); }
  int n_basis() const { return weights.cols(); }
  std::vector<Kernel> kernels() const;  // materialized N_f kernels
  // Upper bound on the squared operator norm of the filter stack, from the
  // per-kernel absolute tap sums.
  double op_norm_bound_sq() const;
};

Field conv_apply(const FilterBank& bank, const Image& img);
Image conv_adjoint(const FilterBank& bank, const Field& field);

}  // namespace proxdiff::denoise

#endif
