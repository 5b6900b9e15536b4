#include "proxdiff/denoise/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace proxdiff::denoise {

Image Image::zeros(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("Image::zeros: bad shape");
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.values.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
  return img;
}

Image clamp01(const Image& img) {
  Image out = img;
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

PsnrResult psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("psnr: shape mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.values.size());
  PsnrResult result;
  if (mse == 0.0) {
    result.infinite = true;
    result.db = std::numeric_limits<double>::infinity();
    return result;
  }
  result.db = 10.0 * std::log10(1.0 / mse);
  return result;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

int parse_positive(const std::string& tok, const char* what) {
  if (tok.empty()) throw std::runtime_error(std::string("ppm: missing ") + what);
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::runtime_error(std::string("ppm: malformed ") + what);
  const long v = std::strtol(tok.c_str(), nullptr, 10);
  if (v <= 0 || v > 1 << 20) throw std::runtime_error(std::string("ppm: out-of-range ") + what);
  return static_cast<int>(v);
}

}  // namespace

Image load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ppm: cannot open '" + path + "'");
  const std::string magic = next_token(in);
  int channels;
  if (magic == "P6")
    channels = 3;
  else if (magic == "P5")
    channels = 1;
  else
    throw std::runtime_error("load_ppm: '" + path + "' is not binary PPM/PGM (P6/P5)");
  const int width = parse_positive(next_token(in), "width");
  const int height = parse_positive(next_token(in), "height");
  const int maxval = parse_positive(next_token(in), "maxval");
  if (maxval != 255) throw std::runtime_error("load_ppm: only maxval 255 is supported");
  // The single whitespace byte after maxval was already consumed by next_token.

  const std::size_t payload = static_cast<std::size_t>(width) * height * channels;
  std::vector<unsigned char> bytes(payload);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(payload));
  if (static_cast<std::size_t>(in.gcount()) != payload)
    throw std::runtime_error("load_ppm: truncated payload in '" + path + "'");

  Image img = Image::zeros(width, height, channels);
  // Payload is interleaved; store planar.
  std::size_t idx = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = bytes[idx++] / 255.0;
  return img;
}

void save_ppm(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("save_ppm: channels must be 1 or 3");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_ppm: cannot open '" + path + "' for writing");
  out << (img.channels == 3 ? "P6" : "P5") << '\n'
      << img.width << ' ' << img.height << '\n'
      << 255 << '\n';
  std::vector<unsigned char> bytes;
  bytes.reserve(img.values.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        bytes.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_ppm: write to '" + path + "' failed");
}

}  // namespace proxdiff::denoise
