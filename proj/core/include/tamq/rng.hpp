#pragma once

#include <cstdint>

namespace tamq {

// Counter-based generator: sample i is a pure function of (seed, i), so
// parallel workers on disjoint index ranges produce the same stream as a
// serial pass.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(index) ^ seed);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Symmetric uniform in [-1, 1), used for deterministic solver seed vectors.
inline double uniform_sym(std::uint64_t seed, std::uint64_t index) {
  return 2.0 * uniform01(seed, index) - 1.0;
}

}  // namespace tamq
