#pragma once

// Deterministic, platform-independent draws for the synthetic backend.
// std::normal_distribution is implementation-defined, so Box-Muller over
// mt19937_64 uniforms is used instead.

#include <cmath>
#include <cstdint>
#include <random>

namespace agentcodec::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal keyed by an arbitrary stream id; deterministic across
/// platforms.
inline double keyed_normal(std::uint64_t seed, std::uint64_t call_index,
                           std::uint64_t stream) {
  std::mt19937_64 eng(mix(mix(seed, call_index), stream));
  double u1 = uniform01(eng);
  double u2 = uniform01(eng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace agentcodec::detail
