#ifndef PROXDIFF_DENOISE_IMAGE_HPP
#define PROXDIFF_DENOISE_IMAGE_HPP

#include <string>

#include "proxdiff/core/vec.hpp"

namespace proxdiff::denoise {

// Planar image, values nominally in [0,1] (loading enforces the range;
// synthetic noise may step slightly outside it). Layout:
// values[(c*height + y)*width + x].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  Vec values;

  static Image zeros(int width, int height, int channels);
  double& at(int x, int y, int c) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int x, int y, int c) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t size() const { return values.size(); }
};

Image clamp01(const Image& img);

struct PsnrResult {
  double db = 0.0;
  bool infinite = false;  // the two images agree exactly
};

// 10 log10(1 / MSE) for unit-range images. Shape mismatch throws.
PsnrResult psnr(const Image& a, const Image& b);

// Binary PPM (P6, 3 channels) and PGM (P5, 1 channel), maxval 255. Loading
// scales to [0,1]; saving clamps and rounds to nearest.
Image load_ppm(const std::string& path);
void save_ppm(const Image& img, const std::string& path);

}  // namespace proxdiff::denoise

#endif
