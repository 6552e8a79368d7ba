#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numeric>

#include "scsamp/coupling_kernel.hpp"
#include "scsamp/dft.hpp"

using namespace scsamp;
using Catch::Approx;
using cplx = std::complex<double>;

TEST_CASE("walk kernel base cases") {
  // ell = 0 is the indicator at t_star
  const KernelParams p0(8, 0.5, 0);
  const auto k0 = walk_kernel(p0, 3);
  for (int t = 0; t < 8; ++t) CHECK(k0[t] == (t == 3 ? 1.0 : 0.0));

  // one lazy step from the origin
  const KernelParams p1(8, 0.5, 1);
  const auto k1 = walk_kernel(p1, 0);
  CHECK(k1[0] == Approx(0.5));
  CHECK(k1[1] == Approx(0.25));
  CHECK(k1[7] == Approx(0.25));
  for (int t = 2; t < 7; ++t) CHECK(k1[t] == 0.0);
}

TEST_CASE("recursive and spectral kernels agree and normalize") {
  for (const auto& [n, ell] : std::vector<std::pair<int, int>>{
           {64, 5}, {128, 64}, {256, 301}, {1024, 800}}) {
    const KernelParams p(n, 0.5, ell);
    const auto rec = walk_kernel_recursive(p, 17 % n);
    const auto spec = walk_kernel_spectral(p, 17 % n);
    double total = 0.0, max_diff = 0.0, norm_sq = 0.0;
    for (int t = 0; t < n; ++t) {
      CHECK(rec[t] >= 0.0);
      total += rec[t];
      max_diff = std::max(max_diff, std::abs(rec[t] - spec[t]));
      norm_sq += rec[t] * rec[t];
    }
    INFO("n=" << n << " ell=" << ell);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(max_diff < 1e-10);
    CHECK(normalization(p) == Approx(std::sqrt(norm_sq)).margin(1e-12));
  }
}

TEST_CASE("translation covariance on the cycle") {
  const KernelParams p(40, 0.3, 23);
  const auto base = walk_kernel(p, 0);
  const auto shifted = walk_kernel(p, 9);
  for (int t = 0; t < p.n; ++t)
    CHECK(shifted[(t + 9) % p.n] == Approx(base[t]).margin(1e-14));
}

TEST_CASE("long-walk Gaussian asymptotics") {
  // peak ~ (2 pi xi ell)^{-1/2}, norm ~ (4 pi xi ell)^{-1/4}
  const KernelParams p(1024, 0.5, 800);
  const auto k = walk_kernel(p, 100);
  const double peak = *std::max_element(k.begin(), k.end());
  const double peak_pred = 1.0 / std::sqrt(2.0 * M_PI * 0.5 * 800);
  CHECK(std::abs(peak - peak_pred) / peak_pred < 0.05);
  const double c_pred = std::pow(4.0 * M_PI * 0.5 * 800, -0.25);
  CHECK(std::abs(normalization(p) - c_pred) / c_pred < 0.05);
}

TEST_CASE("gabor rows: unit norm, degenerate cases, transform identity") {
  // ell = 0: canonical basis vector at t_star times a unit phase
  {
    const KernelParams p(16, 0.5, 0);
    const auto row = gabor_row_time(p, 5, 3);
    for (int t = 0; t < 16; ++t) {
      if (t == 5) {
        const double ang = 2.0 * M_PI * 3 * 5 / 16.0;
        CHECK(std::abs(row[t] - std::polar(1.0, ang)) < 1e-14);
      } else {
        CHECK(row[t] == cplx(0.0, 0.0));
      }
    }
    // frequency side: flat magnitude 1/sqrt(n)
    const auto freq = gabor_row_freq(p, 5, 3);
    for (const auto& f : freq) CHECK(std::abs(f) == Approx(0.25).margin(1e-14));
  }

  // omega* = 0: real nonnegative row proportional to the kernel
  {
    const KernelParams p(64, 0.5, 20);
    const auto row = gabor_row_time(p, 10, 0);
    for (const auto& r : row) {
      CHECK(r.imag() == 0.0);
      CHECK(r.real() >= 0.0);
    }
  }

  // norm 1 and value at omega = omega*
  {
    const KernelParams p(256, 0.5, 64);
    const auto row = gabor_row_time(p, 77, 31);
    double norm_sq = 0.0;
    for (const auto& r : row) norm_sq += std::norm(r);
    CHECK(std::abs(norm_sq - 1.0) < 1e-12);
    const auto freq = gabor_row_freq(p, 77, 31);
    const double at_center = 1.0 / (normalization(p) * 16.0);
    CHECK(std::abs(freq[31] - cplx(at_center, 0.0)) < 1e-13);
  }

  // closed-form frequency row equals the transform of the time row
  for (const auto& [n, ell] : std::vector<std::pair<int, int>>{
           {256, 64}, {256, 800}, {240, 31}}) {
    const KernelParams p(n, 0.5, ell);
    const auto time_row = gabor_row_time(p, 19, n / 3);
    const auto freq_row = gabor_row_freq(p, 19, n / 3);
    const auto transformed = dft_unitary(time_row, -1);
    double max_diff = 0.0, parseval = 0.0;
    for (int k = 0; k < n; ++k) {
      max_diff = std::max(max_diff, std::abs(transformed[k] - freq_row[k]));
      parseval += std::norm(freq_row[k]);
    }
    INFO("n=" << n << " ell=" << ell);
    CHECK(max_diff < 1e-10);
    CHECK(std::abs(parseval - 1.0) < 1e-10);
  }

  CHECK_THROWS_AS(gabor_row_time(KernelParams(16, 0.5, 2), 0, 16),
                  std::invalid_argument);
  CHECK_THROWS_AS(gabor_row_freq(KernelParams(16, 0.5, 2), 0, -1),
                  std::invalid_argument);
}

TEST_CASE("effective bandwidth") {
  // flat row: no concentration, the window just counts points
  const KernelParams flat(1024, 0.5, 0);
  // 99% coverage needs ceil((0.99*1024 - 1)/2) = 507 symmetric pairs
  CHECK(effective_bandwidth(flat, 0.99) ==
        Approx(2.0 * M_PI * 1014 / 1024).margin(1e-12));
  // coverage -> 1 spans the whole grid
  CHECK(effective_bandwidth(flat, 0.999999) ==
        Approx(2.0 * M_PI * 1023 / 1024).margin(1e-12));

  // concentrated long walk: Gaussian-window oracle
  // mass ~ exp(-xi*ell*w^2), 99% two-sided quantile 2.5758*sigma with
  // sigma = (2*xi*ell)^{-1/2}; discreteness rounds the half width up.
  const KernelParams p(1024, 0.5, 800);
  const double width = effective_bandwidth(p, 0.99);
  const double sigma = 1.0 / std::sqrt(2.0 * 0.5 * 800);
  const double oracle = 2.0 * 2.5758293035489004 * sigma;
  CHECK(std::abs(width - oracle) / oracle < 0.05);
  // O((xi ell)^{-1/2}) scaling of the window
  const double scale = 1.0 / std::sqrt(0.5 * 800);
  CHECK(width / scale > 0.25);
  CHECK(width / scale < 4.0);
}
