#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scsamp/types.hpp"

namespace scsamp {

/// Lazy random walk on the n-cycle: stay with probability 1-xi, otherwise
/// step to either neighbour with probability xi/2 each. ell is the number of
/// walk steps.
struct KernelParams {
  int n;
  double xi;
  int ell;

  KernelParams(int n_, double xi_, int ell_) : n(n_), xi(xi_), ell(ell_) {
    if (n < 2) throw std::invalid_argument("KernelParams: n >= 2 required");
    if (!(xi > 0.0) || !(xi < 1.0))
      throw std::invalid_argument("KernelParams: xi in (0,1) required");
    if (ell < 0) throw std::invalid_argument("KernelParams: ell >= 0 required");
  }
};

/// One-step Fourier symbol of the walk at frequency offset domega:
/// 1 - xi + xi*cos(domega).
inline double walk_symbol(const KernelParams& p, double domega) {
  return 1.0 - p.xi + p.xi * std::cos(domega);
}

namespace detail {

// base^ell for possibly negative base, computed in the log domain; values
// below 1e-300 flush to zero.
inline double symbol_power(double base, int ell) {
  if (ell == 0) return 1.0;
  const double mag = std::abs(base);
  if (mag == 0.0) return 0.0;
  const double log_mag = ell * std::log(mag);
  if (log_mag < -690.0) return 0.0;  // < 1e-300
  double p = std::exp(log_mag);
  if (base < 0.0 && (ell % 2) != 0) p = -p;
  return p;
}

// Powers of the symbol on the frequency grid: sym(2*pi*k/n)^ell, k = 0..n-1.
inline std::vector<double> symbol_powers(const KernelParams& p, int ell) {
  std::vector<double> out(p.n);
  for (int k = 0; k < p.n; ++k)
    out[k] = symbol_power(walk_symbol(p, 2.0 * M_PI * k / p.n), ell);
  return out;
}

}  // namespace detail

/// Walk distribution after ell steps, by ell applications of the cyclic
/// three-step recursion. Indices are storage offsets in [0, n).
inline std::vector<double> walk_kernel_recursive(const KernelParams& p,
                                                 int t_star) {
  if (t_star < 0 || t_star >= p.n)
    throw std::invalid_argument("walk_kernel: t_star out of range");
  std::vector<double> cur(p.n, 0.0), next(p.n, 0.0);
  cur[t_star] = 1.0;
  for (int step = 0; step < p.ell; ++step) {
    for (int t = 0; t < p.n; ++t) {
      const int left = (t == 0) ? p.n - 1 : t - 1;
      const int right = (t == p.n - 1) ? 0 : t + 1;
      next[t] = (1.0 - p.xi) * cur[t] + 0.5 * p.xi * (cur[left] + cur[right]);
    }
    cur.swap(next);
  }
  return cur;
}

/// Same distribution through the spectral representation
/// P(t) = (1/n) sum_k sym_k^ell cos(2*pi*k*(t - t_star)/n).
/// Roundoff can leave ~1e-17 negatives where the kernel vanishes; those are
/// clamped to zero.
inline std::vector<double> walk_kernel_spectral(const KernelParams& p,
                                                int t_star) {
  if (t_star < 0 || t_star >= p.n)
    throw std::invalid_argument("walk_kernel: t_star out of range");
  const int n = p.n;
  const std::vector<double> sym = detail::symbol_powers(p, p.ell);
  std::vector<double> cos_tab(n);
  for (int j = 0; j < n; ++j) cos_tab[j] = std::cos(2.0 * M_PI * j / n);
  std::vector<double> out(n, 0.0);
  const int half = n / 2;
  for (int d = 0; d <= half; ++d) {
    double acc = 0.0;
    for (std::int64_t k = 0; k < n; ++k)
      acc += sym[k] * cos_tab[(k * d) % n];
    const double val = std::max(0.0, acc / n);
    out[(t_star + d) % n] = val;
    out[(t_star - d + n) % n] = val;  // kernel is even in t - t_star
  }
  return out;
}

/// Walk distribution; recursion for short walks, spectral path for long ones.
inline std::vector<double> walk_kernel(const KernelParams& p, int t_star) {
  return (p.ell <= 64) ? walk_kernel_recursive(p, t_star)
                       : walk_kernel_spectral(p, t_star);
}

/// Euclidean norm of the kernel row, { sum_t P(t_star,t)^2 }^{1/2}.
/// Independent of t_star; evaluated exactly through Parseval as
/// ((1/n) sum_k sym_k^{2 ell})^{1/2}.
inline double normalization(const KernelParams& p, int /*t_star*/ = 0) {
  const std::vector<double> sym2 = detail::symbol_powers(p, 2 * p.ell);
  double acc = 0.0;
  for (double v : sym2) acc += v;
  return std::sqrt(acc / p.n);
}

/// Time-domain measurement row a(t) = (1/C_ell) e^{i omega* t} P(t_star, t),
/// unit Euclidean norm. omega_idx indexes the frequency grid 2*pi*k/n.
inline std::vector<std::complex<double>> gabor_row_time(const KernelParams& p,
                                                        int t_star,
                                                        int omega_idx) {
  if (omega_idx < 0 || omega_idx >= p.n)
    throw std::invalid_argument("gabor_row_time: omega_idx out of range");
  const std::vector<double> kern = walk_kernel(p, t_star);
  const double inv_c = 1.0 / normalization(p);
  std::vector<std::complex<double>> row(p.n);
  for (int t = 0; t < p.n; ++t) {
    const double ang =
        2.0 * M_PI * (((std::int64_t)omega_idx * t) % p.n) / p.n;
    row[t] = inv_c * kern[t] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return row;
}

/// Frequency-domain row, the unitary transform of gabor_row_time in closed
/// form: a_hat(omega) = (1/(C_ell sqrt(n))) e^{-i(omega-omega*) t_star}
/// sym(omega - omega*)^ell.
inline std::vector<std::complex<double>> gabor_row_freq(const KernelParams& p,
                                                        int t_star,
                                                        int omega_idx) {
  if (omega_idx < 0 || omega_idx >= p.n)
    throw std::invalid_argument("gabor_row_freq: omega_idx out of range");
  if (t_star < 0 || t_star >= p.n)
    throw std::invalid_argument("gabor_row_freq: t_star out of range");
  const int n = p.n;
  const std::vector<double> sym = detail::symbol_powers(p, p.ell);
  const double scale = 1.0 / (normalization(p) * std::sqrt(double(n)));
  std::vector<std::complex<double>> row(n);
  for (int k = 0; k < n; ++k) {
    const std::int64_t d = ((std::int64_t)k - omega_idx + n) % n;
    const double ang = -2.0 * M_PI * ((d * t_star) % n) / n;
    row[k] = scale * sym[d] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return row;
}

/// Full width (in radians, (#points - 1) * 2*pi/n) of the smallest symmetric
/// frequency window around omega* holding at least `coverage` of the row's
/// squared norm.
inline double effective_bandwidth(const KernelParams& p, double coverage) {
  if (!(coverage > 0.0) || !(coverage < 1.0))
    throw std::invalid_argument("effective_bandwidth: coverage in (0,1)");
  const int n = p.n;
  const std::vector<double> mass = detail::symbol_powers(p, 2 * p.ell);
  double total = 0.0;
  for (double m : mass) total += m;
  double acc = mass[0];
  int h = 0;
  while (acc < coverage * total && h < n / 2) {
    ++h;
    acc += mass[h];
    const int mirror = n - h;
    if (mirror != h && mirror < n) acc += mass[mirror];
  }
  const int points = std::min(2 * h + 1, n);
  return 2.0 * M_PI * (points - 1) / n;
}

}  // namespace scsamp
