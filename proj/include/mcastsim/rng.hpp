#pragma once

#include <cstdint>
#include <random>

namespace mcast {

// splitmix64; used for seed derivation and counter-based generator rows so
// that every derived quantity is reproducible from plain integers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive mix of integer fields into one 64-bit seed.
inline std::uint64_t mix_seed(std::uint64_t a) {
  std::uint64_t s = a;
  return splitmix64(s);
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, Rest... rest) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + mix_seed(rest...));
  return splitmix64(s);
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1). Hand-rolled so streams are identical across
// standard library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<__uint128_t>(rng()) * n) >> 64);
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace mcast
