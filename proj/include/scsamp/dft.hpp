#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace scsamp {

/// Unitary discrete Fourier transform by direct summation, with twiddles
/// reduced exactly via integer arithmetic (phase error stays at eps level for
/// any n). O(n^2): intended for operator construction and verification at the
/// problem sizes this library targets, not for streaming workloads.
inline std::vector<std::complex<double>> dft_unitary(
    const std::vector<std::complex<double>>& x, int sign = -1) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (n == 0) return {};
  if (sign != -1 && sign != 1) throw std::invalid_argument("dft_unitary: sign");
  std::vector<std::complex<double>> tw(n);
  const double base = 2.0 * M_PI / static_cast<double>(n);
  for (std::int64_t j = 0; j < n; ++j) {
    const double ang = sign * base * static_cast<double>(j);
    tw[j] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> out(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::int64_t t = 0; t < n; ++t) acc += tw[(k * t) % n] * x[t];
    out[k] = scale * acc;
  }
  return out;
}

}  // namespace scsamp
