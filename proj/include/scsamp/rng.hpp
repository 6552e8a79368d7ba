#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace scsamp {

using Rng = std::mt19937_64;

/// Circularly-symmetric complex Gaussian draw with E|z|^2 = 1
/// (each real component has variance 1/2).
inline std::complex<double> randn_complex(Rng& rng) {
  static constexpr double kHalfSigma = 0.70710678118654752440;  // 1/sqrt(2)
  std::normal_distribution<double> normal(0.0, kHalfSigma);
  double re = normal(rng);
  double im = normal(rng);
  return {re, im};
}

inline double randn(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

/// SplitMix64 finalizer; bijective on uint64.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace scsamp
