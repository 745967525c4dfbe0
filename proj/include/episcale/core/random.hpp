#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace episcale {

// The engine is fully specified by the standard, so streams are identical
// across platforms. All conversions to real numbers are done here rather
// than through <random> distributions, whose algorithms are unspecified.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` of replica `replica` under `master`.
///
///   seed = splitmix64(splitmix64(master ^ splitmix64(replica)) + stream)
///
/// Replica r of master s can therefore be regenerated without running
/// replicas 0..r-1. Stream 0 samples the initial population, stream 1 drives
/// the chain.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replica,
                                    std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(replica)) + stream);
}

inline constexpr std::uint64_t kPopulationStream = 0;
inline constexpr std::uint64_t kDynamicsStream = 1;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform_open01(rng)) / rate;
}

/// Unbiased integer in [0, n) by rejection; n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

}  // namespace episcale
