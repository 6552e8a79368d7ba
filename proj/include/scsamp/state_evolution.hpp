#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scsamp/interp.hpp"
#include "scsamp/scalar_channel.hpp"
#include "scsamp/sensing_ensemble.hpp"

namespace scsamp {

/// Per-row effective noise profile at one iteration.
struct SeProfile {
  std::vector<double> phi;
  int t = 0;
};

struct SeOptions {
  double phi_floor = 1e-12;
  double s_min = 1e-12;
  double s_max = 1e12;
  // Scale-free fixed-point stop: max |phi' - phi| < fp_tol * max(1, max phi).
  double fp_tol = 1e-12;
};

namespace detail {

inline double clamp_s(double s, const SeOptions& opt) {
  return std::clamp(s, opt.s_min, opt.s_max);
}

// Full complex posterior MSE consumed by the recursions: state evolution
// tracks full complex second moments, so it uses twice the half-convention
// mmse.
inline double scalar_channel_mse(double s, const BgPrior& prior) {
  return 2.0 * mmse(s, prior);
}

// Column SNRs s_i = sum_a W_ai / phi_a, clamped.
inline std::vector<double> column_snr(const SensingOperator& op,
                                      const std::vector<double>& phi,
                                      const SeOptions& opt) {
  std::vector<double> den(op.cols(), 0.0);
  std::vector<double> inv_phi(op.rows());
  for (int a = 0; a < op.rows(); ++a)
    inv_phi[a] = 1.0 / std::max(phi[a], opt.phi_floor);
  for (int a = 0; a < op.rows(); ++a) {
    const double w = inv_phi[a];
    op.for_support(a, [&](int col, std::size_t idx) {
      den[col] += op.weight_flat(idx) * w;
    });
  }
  for (auto& s : den) s = clamp_s(s, opt);
  return den;
}

// One profile update phi'_a = sigma2 + sum_i W_ai * mse(s_i) given the
// per-coordinate channel MSE evaluator.
inline SeProfile profile_step(const SeProfile& profile,
                              const SensingOperator& op, double sigma2,
                              const std::function<double(double)>& mse_of_s,
                              const SeOptions& opt) {
  const std::vector<double> snr = column_snr(op, profile.phi, opt);
  std::vector<double> coord_mse(op.cols());
  for (int i = 0; i < op.cols(); ++i) coord_mse[i] = mse_of_s(snr[i]);
  SeProfile next;
  next.t = profile.t + 1;
  next.phi.assign(op.rows(), 0.0);
  for (int a = 0; a < op.rows(); ++a) {
    double acc = 0.0;
    op.for_support(a, [&](int col, std::size_t idx) {
      acc += op.weight_flat(idx) * coord_mse[col];
    });
    next.phi[a] = std::max(sigma2 + acc, opt.phi_floor);
  }
  return next;
}

struct SupScan {
  double sup;
  double arg;
};

// sup of fn over a log grid on [lo, hi], refined by golden section around the
// best grid point.
inline SupScan sup_log_scan(const std::function<double(double)>& fn, double lo,
                            double hi, int grid_points = 200,
                            double rel_tol = 1e-6) {
  const double llo = std::log(lo), lhi = std::log(hi);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<double> xs(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    xs[i] = llo + (lhi - llo) * i / (grid_points - 1);
    const double v = fn(std::exp(xs[i]));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = xs[std::max(0, best - 1)];
  double b = xs[std::min(grid_points - 1, best + 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fn(std::exp(x1)), f2 = fn(std::exp(x2));
  while (b - a > rel_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fn(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fn(std::exp(x1));
    }
  }
  const double arg = std::exp(0.5 * (a + b));
  return {std::max({fn(arg), f1, f2, best_val}), arg};
}

}  // namespace detail

/// Tabulated full-complex channel MSE 2*mmse(s) over log s; monotone
/// interpolation keeps the SE map order-preserving. Used inside trajectory
/// runs where the recursion evaluates the curve millions of times; agreement
/// with direct quadrature is covered by tests.
inline MonotoneCubicTable make_channel_mse_table(const BgPrior& prior,
                                                 const SeOptions& opt = {},
                                                 int points = 8192) {
  return tabulate_log(
      [&](double s) { return detail::scalar_channel_mse(s, prior); },
      opt.s_min, opt.s_max, points);
}

/// Tabulated soft-threshold risk at fixed alpha over log s.
inline MonotoneCubicTable make_soft_threshold_risk_table(
    const BgPrior& prior, double alpha, const SeOptions& opt = {},
    int points = 8192) {
  return tabulate_log(
      [&](double s) { return soft_threshold_risk(s, alpha, prior); },
      opt.s_min, opt.s_max, points);
}

/// No-information starting profile phi_a(0) = sigma^2 + Var(X) * sum_i W_ai.
inline SeProfile se_initial_profile(const SensingOperator& op, double sigma,
                                    const BgPrior& prior,
                                    const SeOptions& opt = {}) {
  SeProfile p;
  p.t = 0;
  p.phi.resize(op.rows());
  for (int a = 0; a < op.rows(); ++a)
    p.phi[a] = std::max(sigma * sigma + prior.second_moment() * op.row_weight_sum(a),
                        opt.phi_floor);
  return p;
}

/// One coupled recursion step
///   phi_a(t+1) = sigma^2 + sum_i W_ai * 2*mmse(sum_b W_bi / phi_b(t)),
/// with direct quadrature for the channel MSE.
inline SeProfile se_sc_step(const SeProfile& profile, const SensingOperator& op,
                            double sigma, const BgPrior& prior,
                            const SeOptions& opt = {}) {
  return detail::profile_step(
      profile, op, sigma * sigma,
      [&](double s) { return detail::scalar_channel_mse(s, prior); }, opt);
}

/// Coupled SE trajectory from the no-information start; stops at t_max or at
/// the profile fixed point. Entrywise monotone non-increasing.
inline std::vector<SeProfile> se_sc_run(const SensingOperator& op, double sigma,
                                        const BgPrior& prior, int t_max,
                                        const SeOptions& opt = {}) {
  const MonotoneCubicTable table = make_channel_mse_table(prior, opt);
  std::vector<SeProfile> traj;
  traj.push_back(se_initial_profile(op, sigma, prior, opt));
  for (int t = 0; t < t_max; ++t) {
    SeProfile next = detail::profile_step(
        traj.back(), op, sigma * sigma,
        [&](double s) { return table(std::log(s)); }, opt);
    double diff = 0.0, scale = 1.0;
    for (int a = 0; a < op.rows(); ++a) {
      diff = std::max(diff, std::abs(next.phi[a] - traj.back().phi[a]));
      scale = std::max(scale, traj.back().phi[a]);
    }
    traj.push_back(std::move(next));
    if (diff < opt.fp_tol * scale) break;
  }
  return traj;
}

/// Coupled soft-threshold recursion (no additive noise term):
///   phi_a(t+1) = sum_i W_ai * E|eta_ST(X + s_i^{-1/2} Z; alpha s_i^{-1/2}) - X|^2.
inline std::vector<SeProfile> se_camp_run(const SensingOperator& op,
                                          const BgPrior& prior, double alpha,
                                          int t_max, const SeOptions& opt = {}) {
  if (!(alpha > 0.0)) throw std::invalid_argument("se_camp_run: alpha > 0");
  const MonotoneCubicTable table =
      make_soft_threshold_risk_table(prior, alpha, opt);
  std::vector<SeProfile> traj;
  SeProfile init;
  init.t = 0;
  init.phi.resize(op.rows());
  for (int a = 0; a < op.rows(); ++a)
    init.phi[a] = std::max(prior.second_moment() * op.row_weight_sum(a),
                           opt.phi_floor);
  traj.push_back(std::move(init));
  for (int t = 0; t < t_max; ++t) {
    SeProfile next = detail::profile_step(
        traj.back(), op, 0.0, [&](double s) { return table(std::log(s)); },
        opt);
    double diff = 0.0, scale = 1.0;
    for (int a = 0; a < op.rows(); ++a) {
      diff = std::max(diff, std::abs(next.phi[a] - traj.back().phi[a]));
      scale = std::max(scale, traj.back().phi[a]);
    }
    traj.push_back(std::move(next));
    if (diff < opt.fp_tol * scale) break;
  }
  return traj;
}

/// Profile consumed at AMP iteration t (>= 1); the trajectory extends past
/// its stopping point by holding the fixed point.
inline const SeProfile& profile_at(const std::vector<SeProfile>& traj, int t) {
  if (traj.empty()) throw std::invalid_argument("profile_at: empty trajectory");
  const std::size_t idx =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)),
                            traj.size() - 1);
  return traj[idx];
}

/// Predicted mean square error (1/n) sum_i 2*mmse(sum_a W_ai / phi_a) for the
/// estimate produced by denoising at profile `profile`.
inline double mse_se_prediction(const SeProfile& profile,
                                const SensingOperator& op, const BgPrior& prior,
                                const SeOptions& opt = {}) {
  const std::vector<double> snr = detail::column_snr(op, profile.phi, opt);
  double acc = 0.0;
  for (double s : snr) acc += detail::scalar_channel_mse(s, prior);
  return acc / op.cols();
}

/// Tabulated variant for per-iteration prediction series.
inline double mse_se_prediction(const SeProfile& profile,
                                const SensingOperator& op,
                                const MonotoneCubicTable& mse_table,
                                const SeOptions& opt = {}) {
  const std::vector<double> snr = detail::column_snr(op, profile.phi, opt);
  double acc = 0.0;
  for (double s : snr) acc += mse_table(std::log(s));
  return acc / op.cols();
}

struct IidSeResult {
  std::vector<double> phi;  // phi[0] = Var(X)/delta, then the recursion
  bool converged = false;
  int iterations = 0;
};

/// Scalar recursion phi_{t+1} = (sigma^2 + 2*mmse(1/phi_t)) / delta from
/// phi_0 = Var(X)/delta; at sigma = 0 this is the plain uncoupled recursion.
inline IidSeResult se_iid_run(double delta, double sigma, const BgPrior& prior,
                              int t_max, const SeOptions& opt = {}) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("se_iid_run: delta in (0,1]");
  IidSeResult res;
  res.phi.push_back(prior.second_moment() / delta);
  for (int t = 0; t < t_max; ++t) {
    const double cur = std::max(res.phi.back(), opt.phi_floor);
    const double s = detail::clamp_s(1.0 / cur, opt);
    double next =
        (sigma * sigma + detail::scalar_channel_mse(s, prior)) / delta;
    next = std::max(next, opt.phi_floor);
    res.phi.push_back(next);
    res.iterations = t + 1;
    if (std::abs(next - cur) < opt.fp_tol * std::max(1.0, cur)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

struct ThresholdResult {
  double epsilon;
  double delta_tilde;  // sup_s s * 2*mmse(s)
  double s_star;
  double info_dim;  // Renyi information dimension of the prior: epsilon
};

/// Algorithmic threshold of the uncoupled posterior-expectation recursion,
/// delta_tilde = sup_{s>=0} s * 2*mmse(s); the recursion converges to the
/// noiseless fixed point iff delta exceeds it.
inline ThresholdResult renyi_threshold(double epsilon) {
  const BgPrior prior(epsilon);
  auto fn = [&](double s) { return s * detail::scalar_channel_mse(s, prior); };
  const auto scan = detail::sup_log_scan(fn, 1e-4, 1e6);
  return {epsilon, scan.sup, scan.arg, epsilon};
}

/// Boundary of the scalar soft-threshold recursion at threshold scale alpha:
/// sup_s s * strisk(s, alpha).
inline double soft_threshold_se_threshold(const BgPrior& prior, double alpha) {
  auto fn = [&](double s) { return s * soft_threshold_risk(s, alpha, prior); };
  return detail::sup_log_scan(fn, 1e-4, 1e6).sup;
}

struct AlphaTuning {
  double alpha_star;
  double delta_threshold;
};

/// Tune the soft-threshold scale to minimize the recursion boundary
/// (equivalently, maximize the success region) by golden section on
/// [alpha_lo, alpha_hi].
inline AlphaTuning tune_alpha(const BgPrior& prior, double alpha_lo = 0.5,
                              double alpha_hi = 3.0) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = alpha_lo, b = alpha_hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = soft_threshold_se_threshold(prior, x1);
  double f2 = soft_threshold_se_threshold(prior, x2);
  while (b - a > 1e-4) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = soft_threshold_se_threshold(prior, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = soft_threshold_se_threshold(prior, x1);
    }
  }
  const double alpha = 0.5 * (a + b);
  return {alpha, soft_threshold_se_threshold(prior, alpha)};
}

struct FixedPointScan {
  int stable_count = 0;
  int crossings = 0;
  bool origin_stable = false;
  std::vector<double> stable_points;  // interior stable fixed points
};

/// Count stable fixed points of a scalar SE map phi -> f(phi) by sign changes
/// of g(phi) = phi - f(phi) on a log grid. The origin counts as stable when
/// g > 0 at the bottom of the grid (the map flows toward zero there); each
/// -to-+ crossing is an attracting interior fixed point.
inline FixedPointScan count_stable_fixed_points(
    const std::function<double(double)>& map_fn, double phi_lo, double phi_hi,
    int grid_points = 400) {
  FixedPointScan out;
  if (!(phi_hi > phi_lo) || phi_lo <= 0.0)
    throw std::invalid_argument("count_stable_fixed_points: bad bracket");
  const double llo = std::log(phi_lo), lhi = std::log(phi_hi);
  double prev_phi = phi_lo;
  double prev_g = prev_phi - map_fn(prev_phi);
  out.origin_stable = prev_g > 0.0;
  for (int i = 1; i < grid_points; ++i) {
    const double phi = std::exp(llo + (lhi - llo) * i / (grid_points - 1));
    const double g = phi - map_fn(phi);
    if (prev_g != 0.0 && g != 0.0 && (prev_g < 0.0) != (g < 0.0)) {
      ++out.crossings;
      if (prev_g < 0.0 && g > 0.0)
        out.stable_points.push_back(std::sqrt(prev_phi * phi));
    }
    prev_g = g;
    prev_phi = phi;
  }
  out.stable_count = static_cast<int>(out.stable_points.size()) +
                     (out.origin_stable ? 1 : 0);
  return out;
}

}  // namespace scsamp
