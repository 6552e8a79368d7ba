#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace scsamp {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson tangents).
/// Monotone data stays monotone after interpolation; evaluation outside the
/// grid clamps to the end values.
class MonotoneCubicTable {
 public:
  MonotoneCubicTable() = default;

  MonotoneCubicTable(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n)
      throw std::invalid_argument("MonotoneCubicTable: need >= 2 matching points");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(xs_[i + 1] > xs_[i]))
        throw std::invalid_argument("MonotoneCubicTable: xs must increase");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      d[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    ms_.assign(n, 0.0);
    ms_[0] = d[0];
    ms_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      ms_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        ms_[i] = 0.0;
        ms_[i + 1] = 0.0;
        continue;
      }
      const double a = ms_[i] / d[i];
      const double b = ms_[i + 1] / d[i];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double t = 3.0 / std::sqrt(s);
        ms_[i] = t * a * d[i];
        ms_[i + 1] = t * b * d[i];
      }
    }
  }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * ys_[i] + h * h10 * ms_[i] + h01 * ys_[i + 1] + h * h11 * ms_[i + 1];
  }

  bool empty() const { return xs_.empty(); }

 private:
  std::vector<double> xs_, ys_, ms_;
};

/// Tabulate fn(s) over a log-uniform grid s in [s_lo, s_hi]; the returned
/// table is evaluated at x = log(s).
inline MonotoneCubicTable tabulate_log(const std::function<double(double)>& fn,
                                       double s_lo, double s_hi, int points) {
  if (!(s_hi > s_lo) || s_lo <= 0.0 || points < 2)
    throw std::invalid_argument("tabulate_log: bad grid");
  std::vector<double> xs(points), ys(points);
  const double x0 = std::log(s_lo);
  const double x1 = std::log(s_hi);
  for (int i = 0; i < points; ++i) {
    xs[i] = x0 + (x1 - x0) * i / (points - 1);
    ys[i] = fn(std::exp(xs[i]));
  }
  return MonotoneCubicTable(std::move(xs), std::move(ys));
}

}  // namespace scsamp
