#ifndef PROXDIFF_CORE_RNG_HPP
#define PROXDIFF_CORE_RNG_HPP

#include <cstdint>
#include <random>

#include "proxdiff/core/vec.hpp"

namespace proxdiff {

// Purpose-tagged sub-streams of a single experiment seed. Each consumer draws
// from its own stream so that adding draws in one place never shifts another.
enum class RngStream : std::uint64_t {
  kMatrix = 1,
  kTarget = 2,
  kDirectionU = 3,
  kDirectionXbar = 4,
  kNoise = 5,
  kThetaInit = 6,
  kShuffleBase = 7,   // + epoch index
  kRestart = 8,
  kGeneric = 9,
};

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_id);

// Deterministic, seedable generator. The integer sequence is the standard
// mt19937_64 one; uniform and normal variates are mapped from it explicitly
// rather than via std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  Rng(std::uint64_t seed, RngStream stream)
      : gen_(derive_stream_seed(seed, static_cast<std::uint64_t>(stream))) {}
  Rng(std::uint64_t seed, RngStream stream, std::uint64_t offset)
      : gen_(derive_stream_seed(seed, static_cast<std::uint64_t>(stream) + (offset << 16))) {}

  double uniform01();                  // in [0, 1)
  double uniform(double a, double b);  // in [a, b)
  double normal(double mean = 0.0, double stddev = 1.0);  // Box-Muller
  std::uint64_t next_u64() { return gen_(); }
  int uniform_int(int n);  // in {0, ..., n-1}

  Vec uniform_vec(std::size_t n, double a, double b);
  Vec normal_vec(std::size_t n, double mean = 0.0, double stddev = 1.0);

 private:
  std::mt19937_64 gen_;
};

}  // namespace proxdiff

#endif
