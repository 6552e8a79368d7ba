#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "scsamp/coupling_kernel.hpp"
#include "scsamp/rng.hpp"
#include "scsamp/types.hpp"

namespace scsamp {

/// Parameters of the spatially-coupled ensemble: m1 seed bands of L identical
/// rows each, plus floor(n*delta) modulated-kernel rows.
struct EnsembleParams {
  int n;
  int m1;
  int L;
  int ell;
  double xi;
  double delta;
  double sigma;

  EnsembleParams(int n_, int m1_, int L_, int ell_, double xi_, double delta_,
                 double sigma_)
      : n(n_), m1(m1_), L(L_), ell(ell_), xi(xi_), delta(delta_), sigma(sigma_) {
    if (n < 2) throw std::invalid_argument("EnsembleParams: n >= 2 required");
    if (m1 < 0 || L < 0 || (m1 > 0 && L == 0) || (m1 == 0 && L > 0))
      throw std::invalid_argument("EnsembleParams: invalid seed shape");
    if (ell < 0) throw std::invalid_argument("EnsembleParams: ell >= 0");
    if (!(xi > 0.0) || !(xi < 1.0))
      throw std::invalid_argument("EnsembleParams: xi in (0,1)");
    if (!(delta > 0.0) || !(delta < 1.0))
      throw std::invalid_argument("EnsembleParams: delta in (0,1)");
    if (!(sigma >= 0.0))
      throw std::invalid_argument("EnsembleParams: sigma >= 0");
    if (rows() > n)
      throw std::invalid_argument(
          "EnsembleParams: m1*L + floor(n*delta) exceeds n");
  }

  int bulk_rows() const { return static_cast<int>(n * delta); }
  int seed_rows() const { return m1 * L; }
  int rows() const { return seed_rows() + bulk_rows(); }
  /// Seed measurements are meant to be a vanishing fraction of n.
  bool seed_fraction_heavy() const { return seed_rows() > n / 10; }
  KernelParams kernel() const { return KernelParams(n, xi, ell); }
};

enum class RowKind { seed, gabor, fourier };

struct RowInfo {
  RowKind kind;
  int band;       // seed band index (0-based), -1 otherwise
  int t_center;   // time center / sample time, -1 for seed rows
  int omega_idx;  // frequency center index, band frequency for seed rows
};

struct Measurements {
  std::vector<std::complex<double>> y;
  double sigma;
};

/// Frequency-domain measurement operator: m rows acting on length-n spectra,
/// stored dense with a per-row cyclic support window (entries whose magnitude
/// falls below 1e-14 are outside the window; the banded paths carry a
/// documented error < 1e-12). Immutable after construction.
class SensingOperator {
 public:
  static constexpr double kSupportCutoff = 1e-14;

  SensingOperator(int n, std::vector<std::complex<double>> entries,
                  std::vector<RowInfo> info, double sigma)
      : n_(n),
        m_(static_cast<int>(info.size())),
        entries_(std::move(entries)),
        info_(std::move(info)),
        sigma_(sigma) {
    if (entries_.size() != static_cast<std::size_t>(m_) * n_)
      throw std::invalid_argument("SensingOperator: entry/info size mismatch");
    weights_.resize(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i)
      weights_[i] = std::norm(entries_[i]);
    build_supports();
    column_weight_sums_.assign(n_, 0.0);
    for (int a = 0; a < m_; ++a)
      for_support(a, [&](int col, std::size_t idx) {
        column_weight_sums_[col] += weights_[idx];
      });
  }

  int rows() const { return m_; }
  int cols() const { return n_; }
  double sigma() const { return sigma_; }
  const std::vector<RowInfo>& row_info() const { return info_; }
  const std::vector<double>& column_weight_sums() const {
    return column_weight_sums_;
  }

  std::complex<double> entry(int a, int i) const {
    return entries_[static_cast<std::size_t>(a) * n_ + i];
  }
  std::complex<double> entry_flat(std::size_t idx) const { return entries_[idx]; }
  double weight(int a, int i) const {
    return weights_[static_cast<std::size_t>(a) * n_ + i];
  }
  double weight_flat(std::size_t idx) const { return weights_[idx]; }

  /// Sum of W over one row (1 for unit-norm rows).
  double row_weight_sum(int a) const {
    double acc = 0.0;
    for_support(a, [&](int, std::size_t idx) { acc += weights_[idx]; });
    return acc;
  }

  /// y = A_F x, using the banded supports.
  std::vector<std::complex<double>> apply(
      const std::vector<std::complex<double>>& x) const {
    check_len(x.size(), n_, "apply");
    std::vector<std::complex<double>> y(m_);
    for (int a = 0; a < m_; ++a) {
      std::complex<double> acc = 0.0;
      for_support(a, [&](int col, std::size_t idx) {
        acc += entries_[idx] * x[col];
      });
      y[a] = acc;
    }
    return y;
  }

  /// Dense reference product (no support truncation).
  std::vector<std::complex<double>> apply_dense(
      const std::vector<std::complex<double>>& x) const {
    check_len(x.size(), n_, "apply_dense");
    std::vector<std::complex<double>> y(m_);
    for (int a = 0; a < m_; ++a) {
      std::complex<double> acc = 0.0;
      const std::size_t base = static_cast<std::size_t>(a) * n_;
      for (int i = 0; i < n_; ++i) acc += entries_[base + i] * x[i];
      y[a] = acc;
    }
    return y;
  }

  /// A_F^* r.
  std::vector<std::complex<double>> adjoint_apply(
      const std::vector<std::complex<double>>& r) const {
    check_len(r.size(), m_, "adjoint_apply");
    std::vector<std::complex<double>> out(n_, {0.0, 0.0});
    for (int a = 0; a < m_; ++a) {
      const std::complex<double> ra = r[a];
      for_support(a, [&](int col, std::size_t idx) {
        out[col] += std::conj(entries_[idx]) * ra;
      });
    }
    return out;
  }

  /// (diag(q) A_F)^* r = A_F^* (q .* r) for a real per-row weight vector;
  /// lets callers assemble row-reweighted adjoints in one pass.
  std::vector<std::complex<double>> adjoint_apply(
      const std::vector<std::complex<double>>& r,
      const std::vector<double>& row_weights) const {
    check_len(r.size(), m_, "adjoint_apply");
    check_len(row_weights.size(), m_, "adjoint_apply row_weights");
    std::vector<std::complex<double>> out(n_, {0.0, 0.0});
    for (int a = 0; a < m_; ++a) {
      const std::complex<double> ra = row_weights[a] * r[a];
      for_support(a, [&](int col, std::size_t idx) {
        out[col] += std::conj(entries_[idx]) * ra;
      });
    }
    return out;
  }

  /// y = A_F x + w with w iid circularly-symmetric complex Gaussian,
  /// E|w_a|^2 = sigma^2. sigma = 0 yields the noiseless measurements.
  Measurements measure(const std::vector<std::complex<double>>& x,
                       Rng& rng) const {
    Measurements meas{apply(x), sigma_};
    if (sigma_ > 0.0)
      for (auto& ya : meas.y) ya += sigma_ * randn_complex(rng);
    return meas;
  }

  /// Iterate (column, flat index) over the support window of row a.
  template <class Fn>
  void for_support(int a, Fn&& fn) const {
    const std::size_t base = static_cast<std::size_t>(a) * n_;
    const int start = support_start_[a];
    const int len = support_len_[a];
    const int first_run = std::min(len, n_ - start);
    for (int j = 0; j < first_run; ++j) {
      const int col = start + j;
      fn(col, base + col);
    }
    for (int col = 0; col < len - first_run; ++col) fn(col, base + col);
  }

  /// Reproducibility audit dump: parameters line, seed row count, then one
  /// line per bulk row with its (t, omega index) centers.
  void dump(std::ostream& os) const {
    os << "n=" << n_ << " m=" << m_ << " sigma=" << sigma_ << "\n";
    int seeds = 0;
    for (const auto& ri : info_)
      if (ri.kind == RowKind::seed) ++seeds;
    os << "seed_rows=" << seeds << "\n";
    for (int a = 0; a < m_; ++a) {
      const auto& ri = info_[a];
      if (ri.kind == RowKind::seed) continue;
      os << a << " " << ri.t_center << " " << ri.omega_idx << "\n";
    }
  }

 private:
  static void check_len(std::size_t got, int want, const char* where) {
    if (got != static_cast<std::size_t>(want))
      throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }

  void build_supports() {
    support_start_.resize(m_);
    support_len_.resize(m_);
    for (int a = 0; a < m_; ++a) {
      const std::size_t base = static_cast<std::size_t>(a) * n_;
      const auto& ri = info_[a];
      if (ri.kind == RowKind::fourier) {
        support_start_[a] = 0;
        support_len_[a] = n_;
        continue;
      }
      if (ri.kind == RowKind::seed) {
        support_start_[a] = ri.omega_idx;
        support_len_[a] = 1;
        continue;
      }
      // Kernel magnitude decreases monotonically with cyclic distance from
      // the center; find the symmetric half width above the cutoff.
      int h = 0;
      while (h < n_ / 2) {
        const int col = (ri.omega_idx + h + 1) % n_;
        if (std::abs(entries_[base + col]) <= kSupportCutoff) break;
        ++h;
      }
      const int len = std::min(2 * h + 1, n_);
      support_start_[a] = ((ri.omega_idx - h) % n_ + n_) % n_;
      support_len_[a] = len;
    }
  }

  int n_, m_;
  std::vector<std::complex<double>> entries_;  // m x n, row major
  std::vector<double> weights_;                // |entries|^2
  std::vector<RowInfo> info_;
  std::vector<int> support_start_, support_len_;
  std::vector<double> column_weight_sums_;
  double sigma_;
};

/// Spatially-coupled ensemble: m1 bands of L identical canonical frequency
/// rows e_k (k = 0..m1-1), then floor(n*delta) modulated kernel rows with
/// iid uniform time centers and equispaced frequency centers
/// omega_idx(j) = floor(j*n/|bulk|), in ascending frequency order.
inline SensingOperator build_spatially_coupled(const EnsembleParams& params,
                                               Rng& rng) {
  const int n = params.n;
  const int nb = params.bulk_rows();
  const int m = params.rows();
  const KernelParams kp = params.kernel();
  const std::vector<double> sym = detail::symbol_powers(kp, kp.ell);
  const double scale = 1.0 / (normalization(kp) * std::sqrt(double(n)));

  std::vector<std::complex<double>> entries(
      static_cast<std::size_t>(m) * n, std::complex<double>(0.0, 0.0));
  std::vector<RowInfo> info;
  info.reserve(m);

  int a = 0;
  for (int k = 0; k < params.m1; ++k) {
    for (int copy = 0; copy < params.L; ++copy, ++a) {
      entries[static_cast<std::size_t>(a) * n + k] = 1.0;
      info.push_back({RowKind::seed, k, -1, k});
    }
  }
  std::uniform_int_distribution<int> unif_time(0, n - 1);
  for (int j = 0; j < nb; ++j, ++a) {
    const int t_r = unif_time(rng);
    const int w_r = static_cast<int>((static_cast<std::int64_t>(j) * n) / nb);
    const std::size_t base = static_cast<std::size_t>(a) * n;
    for (int k = 0; k < n; ++k) {
      const int d = static_cast<int>((static_cast<std::int64_t>(k) - w_r + n) % n);
      if (sym[d] == 0.0) continue;
      // conj(a_hat): +i (omega_k - omega_r) t_r phase
      const double ang =
          2.0 * M_PI * ((static_cast<std::int64_t>(d) * t_r) % n) / n;
      entries[base + k] =
          scale * sym[d] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    info.push_back({RowKind::gabor, -1, t_r, w_r});
  }
  return SensingOperator(n, std::move(entries), std::move(info), params.sigma);
}

/// Random-time instantaneous sampling: m distinct uniform times t_r; in the
/// frequency domain each row is the pure-phase vector (1/sqrt(n)) e^{i w t_r}.
inline SensingOperator build_random_fourier(int n, int m, Rng& rng,
                                            double sigma = 0.0) {
  if (n < 1 || m < 1 || m > n)
    throw std::invalid_argument("build_random_fourier: need 1 <= m <= n");
  std::vector<int> times(n);
  for (int i = 0; i < n; ++i) times[i] = i;
  for (int j = 0; j < m; ++j) {
    std::uniform_int_distribution<int> pick(j, n - 1);
    std::swap(times[j], times[pick(rng)]);
  }
  std::vector<std::complex<double>> entries(static_cast<std::size_t>(m) * n);
  std::vector<RowInfo> info;
  info.reserve(m);
  const double scale = 1.0 / std::sqrt(double(n));
  for (int a = 0; a < m; ++a) {
    const int t_r = times[a];
    const std::size_t base = static_cast<std::size_t>(a) * n;
    for (int k = 0; k < n; ++k) {
      const double ang =
          2.0 * M_PI * ((static_cast<std::int64_t>(k) * t_r) % n) / n;
      entries[base + k] =
          scale * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    info.push_back({RowKind::fourier, -1, t_r, 0});
  }
  return SensingOperator(n, std::move(entries), std::move(info), sigma);
}

}  // namespace scsamp
