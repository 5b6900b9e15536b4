#include "proxdiff/core/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace proxdiff {

namespace {
// SplitMix64 step, used only to spread (seed, stream) pairs apart.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream_id * 0x9e3779b97f4a7c15ULL));
}

double Rng::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform01(); }

double Rng::normal(double mean, double stddev) {
  // Box-Muller, cosine branch only; two draws per variate keeps the stream
  // position independent of any caching.
  double u1 = uniform01();
  double u2 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Rejection sampling over the top 32 bits for an unbiased draw.
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = (~0ULL / un) * un;
  std::uint64_t x = gen_();
  while (x >= limit) x = gen_();
  return static_cast<int>(x % un);
}

Vec Rng::uniform_vec(std::size_t n, double a, double b) {
  Vec v(n);
  for (double& x : v) x = uniform(a, b);
  return v;
}

Vec Rng::normal_vec(std::size_t n, double mean, double stddev) {
  Vec v(n);
  for (double& x : v) x = normal(mean, stddev);
  return v;
}

}  // namespace proxdiff
