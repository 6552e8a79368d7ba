#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace scsamp {

struct LogitPoint {
  double delta;
  int successes;
  int instances;
};

struct LogitFit {
  double delta_c = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;

  bool flagged(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
};

/// Maximum-likelihood fit of p(delta) = 1/(1 + exp(-(delta - delta_c)/beta))
/// to binomial success counts, by damped Newton iteration on centered
/// coordinates. The 95% CI comes from the observed information via the delta
/// method. Perfectly separated data falls back to the midpoint between the
/// last all-failure and first all-success grid points and is flagged.
inline LogitFit fit_logit(const std::vector<LogitPoint>& points) {
  LogitFit fit;
  if (points.empty()) {
    fit.flags.push_back("empty");
    return fit;
  }
  std::vector<LogitPoint> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const LogitPoint& a, const LogitPoint& b) {
              return a.delta < b.delta;
            });

  bool any_mixed = false;
  bool any_success = false, any_failure = false;
  double last_all_fail = std::numeric_limits<double>::quiet_NaN();
  double first_all_success = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : pts) {
    if (p.successes > 0) any_success = true;
    if (p.successes < p.instances) any_failure = true;
    if (p.successes > 0 && p.successes < p.instances) any_mixed = true;
  }
  for (const auto& p : pts)
    if (p.successes == 0) last_all_fail = p.delta;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it)
    if (it->successes == it->instances) first_all_success = it->delta;

  if (!any_success) {
    fit.delta_c = pts.back().delta;
    fit.flags = {"degenerate", "all_failure"};
    return fit;
  }
  if (!any_failure) {
    fit.delta_c = pts.front().delta;
    fit.flags = {"degenerate", "all_success"};
    return fit;
  }
  if (!any_mixed) {
    // Clean separation: no information about the slope.
    fit.delta_c = 0.5 * (last_all_fail + first_all_success);
    fit.ci_low = std::min(last_all_fail, first_all_success);
    fit.ci_high = std::max(last_all_fail, first_all_success);
    fit.flags = {"separated"};
    return fit;
  }

  double mean_delta = 0.0;
  for (const auto& p : pts) mean_delta += p.delta;
  mean_delta /= pts.size();
  double spread = 0.0;
  for (const auto& p : pts)
    spread = std::max(spread, std::abs(p.delta - mean_delta));
  if (spread == 0.0) {
    fit.delta_c = pts.front().delta;
    fit.flags = {"degenerate", "single_location"};
    return fit;
  }

  // logit p = a + b*x on x = (delta - mean)/spread
  auto loglik = [&](double a, double b) {
    double ll = 0.0;
    for (const auto& p : pts) {
      const double x = (p.delta - mean_delta) / spread;
      const double eta = std::clamp(a + b * x, -700.0, 700.0);
      // s*eta - m*log(1+e^eta)
      const double log1pe =
          (eta > 30.0) ? eta : std::log1p(std::exp(eta));
      ll += p.successes * eta - p.instances * log1pe;
    }
    return ll;
  };

  double a = 0.0, b = 1.0;
  double ll = loglik(a, b);
  bool converged = false;
  double haa = 0, hab = 0, hbb = 0;
  for (int iter = 0; iter < 200; ++iter) {
    double ga = 0.0, gb = 0.0;
    haa = hab = hbb = 0.0;
    for (const auto& p : pts) {
      const double x = (p.delta - mean_delta) / spread;
      const double eta = std::clamp(a + b * x, -700.0, 700.0);
      const double pr = 1.0 / (1.0 + std::exp(-eta));
      const double resid = p.successes - p.instances * pr;
      const double w = p.instances * pr * (1.0 - pr);
      ga += resid;
      gb += resid * x;
      haa += w;
      hab += w * x;
      hbb += w * x * x;
    }
    const double det = haa * hbb - hab * hab;
    if (!(det > 1e-300)) break;
    double step_a = (hbb * ga - hab * gb) / det;
    double step_b = (haa * gb - hab * ga) / det;
    double scale = 1.0;
    double new_ll = loglik(a + step_a, b + step_b);
    int halvings = 0;
    while (new_ll < ll && halvings < 40) {
      scale *= 0.5;
      new_ll = loglik(a + scale * step_a, b + scale * step_b);
      ++halvings;
    }
    a += scale * step_a;
    b += scale * step_b;
    const bool small_step =
        std::abs(scale * step_a) < 1e-10 && std::abs(scale * step_b) < 1e-10;
    ll = new_ll;
    if (small_step) {
      converged = true;
      break;
    }
  }

  if (!converged || std::abs(b) > 1e6) {
    // Quasi-separation: the slope ran away. Fall back to the empirical 50%
    // crossing midpoint.
    double below = pts.front().delta, above = pts.back().delta;
    for (const auto& p : pts)
      if (2 * p.successes <= p.instances) below = p.delta;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      if (2 * it->successes >= it->instances) above = it->delta;
    fit.delta_c = 0.5 * (below + above);
    fit.ci_low = std::min(below, above);
    fit.ci_high = std::max(below, above);
    fit.flags = {"separated"};
    return fit;
  }

  // Back-transform: logit p = (a - b*mean/spread) + (b/spread) * delta.
  const double slope = b / spread;
  fit.beta = 1.0 / slope;
  fit.delta_c = mean_delta - a / b * spread;
  if (slope < 0.0) fit.flags.push_back("negative_slope");

  // Covariance of (a, b) from the observed information; delta method for
  // delta_c = mean - spread*a/b.
  const double det = haa * hbb - hab * hab;
  if (det > 1e-300) {
    const double cov_aa = hbb / det;
    const double cov_ab = -hab / det;
    const double cov_bb = haa / det;
    const double da = -spread / b;
    const double db = spread * a / (b * b);
    const double var = da * da * cov_aa + 2 * da * db * cov_ab + db * db * cov_bb;
    if (var >= 0.0) {
      const double half = 1.959963984540054 * std::sqrt(var);
      fit.ci_low = fit.delta_c - half;
      fit.ci_high = fit.delta_c + half;
    }
  }
  return fit;
}

}  // namespace scsamp
