#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace commlab {

// splitmix64 finalizer; used to derive independent child seeds so that
// per-sample / per-chunk streams do not depend on evaluation order.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t child) {
  return mix_seed(mix_seed(parent) ^ (child * 0xd1342543de82ef95ULL + 1));
}

using Rng = std::mt19937_64;

/// Uniform double in [0,1) built from the raw 53 high bits, so that streams
/// are identical across standard library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on uniform01 (portable, unlike
/// std::normal_distribution whose algorithm is implementation defined).
inline double standard_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace commlab
