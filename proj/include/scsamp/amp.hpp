#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scsamp/scalar_channel.hpp"
#include "scsamp/sensing_ensemble.hpp"
#include "scsamp/state_evolution.hpp"

namespace scsamp {

struct AmpConfig {
  int t_max = 0;  // 0: caller decides; experiment layer defaults to 4*m
  double phi_floor = 1e-12;
  double success_threshold = std::numeric_limits<double>::quiet_NaN();
  int record_every = 1;
  // Stop when the MSE has moved less than this over 10 iterations.
  double stagnation_tol = 1e-12;
  // Abort when the MSE exceeds this multiple of its initial value.
  double divergence_factor = 1e3;
};

enum class AmpStatus { converged, max_iterations, diverged };

/// Iteration state. Entering iteration t the state holds xhat^t, r^{t-1},
/// and the Onsager coefficients b^t (real) and d^t (complex) accumulated from
/// the previous step's denoiser derivatives.
struct AmpState {
  std::vector<cplx> xhat;
  std::vector<cplx> r_prev;
  std::vector<double> onsager_b;
  std::vector<cplx> onsager_d;
  int t = 1;

  static AmpState initial(int n, int m) {
    AmpState s;
    s.xhat.assign(n, {0.0, 0.0});  // prior mean
    s.r_prev.assign(m, {0.0, 0.0});
    s.onsager_b.assign(m, 0.0);
    s.onsager_d.assign(m, {0.0, 0.0});
    s.t = 1;
    return s;
  }
};

struct TrajectoryPoint {
  int t;
  double mse;
};

struct Trajectory {
  std::vector<TrajectoryPoint> recorded;
  std::vector<double> mse_by_iter;  // mse_by_iter[t-1] = MSE of xhat^t
  AmpStatus status = AmpStatus::max_iterations;
  int iterations = 0;
  double final_mse = std::numeric_limits<double>::quiet_NaN();
};

/// (1/n) || a - b ||^2 over complex coordinates.
inline double mse_empirical(const std::vector<cplx>& a,
                            const std::vector<cplx>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("mse_empirical: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

/// Posterior-expectation denoiser bound to a prior.
struct PosteriorExpectationDenoiser {
  BgPrior prior;
  DenoiserEval operator()(cplx v, double s) const {
    return posterior_mean_derivs(v, s, prior);
  }
};

/// Soft threshold at theta = alpha / sqrt(s).
struct SoftThresholdDenoiser {
  double alpha;
  DenoiserEval operator()(cplx v, double s) const {
    return soft_threshold_derivs(v, alpha / std::sqrt(s));
  }
};

namespace detail {

inline bool all_finite(const std::vector<cplx>& v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// One coupled iteration:
//   r^t      = y - A_F xhat^t + b^t .* r^{t-1} + d^t .* conj(r^{t-1})
//   v^t      = xhat^t + (Q^t .* A_F)^* r^t,  Q^t_ai = phi_a^{-1} / den_i
//   xhat^{t+1} = eta(v^t; s_i),  s_i = den_i = sum_a W_ai phi_a^{-1}
//   b^{t+1}_a = sum_i Q^t_ai W_ai      d eta_i
//   d^{t+1}_a = sum_i Q^t_ai (A_F)^2_ai dbar eta_i
// phi is the SE profile matched to this iteration.
template <class Denoiser>
bool coupled_step(AmpState& state, const SensingOperator& op,
                  const std::vector<cplx>& y, const Denoiser& denoiser,
                  const std::vector<double>& phi, const AmpConfig& cfg) {
  const int n = op.cols();
  const int m = op.rows();
  std::vector<double> inv_phi(m);
  for (int a = 0; a < m; ++a)
    inv_phi[a] = 1.0 / std::max(phi[a], cfg.phi_floor);

  std::vector<double> den(n, 0.0);
  for (int a = 0; a < m; ++a) {
    const double w = inv_phi[a];
    op.for_support(a, [&](int col, std::size_t idx) {
      den[col] += op.weight_flat(idx) * w;
    });
  }
  for (auto& s : den) s = std::clamp(s, 1e-12, 1e12);

  // residual with both Onsager corrections
  std::vector<cplx> r = op.apply(state.xhat);
  for (int a = 0; a < m; ++a) {
    r[a] = y[a] - r[a] + state.onsager_b[a] * state.r_prev[a] +
           state.onsager_d[a] * std::conj(state.r_prev[a]);
  }

  std::vector<cplx> z = op.adjoint_apply(r, inv_phi);
  std::vector<cplx> xhat_next(n);
  std::vector<double> d_eta(n);
  std::vector<cplx> dbar_eta(n);
  for (int i = 0; i < n; ++i) {
    const cplx v = state.xhat[i] + z[i] / den[i];
    const DenoiserEval ev = denoiser(v, den[i]);
    xhat_next[i] = ev.value;
    d_eta[i] = ev.d_v.real();  // real for both implemented denoisers
    dbar_eta[i] = ev.d_vbar;
  }

  for (int a = 0; a < m; ++a) {
    double b_acc = 0.0;
    cplx d_acc{0.0, 0.0};
    op.for_support(a, [&](int col, std::size_t idx) {
      const double q = inv_phi[a] / den[col];
      b_acc += q * op.weight_flat(idx) * d_eta[col];
      const cplx entry = op.entry_flat(idx);
      d_acc += q * (entry * entry) * dbar_eta[col];
    });
    state.onsager_b[a] = b_acc;
    state.onsager_d[a] = d_acc;
  }
  state.xhat.swap(xhat_next);
  state.r_prev.swap(r);
  state.t += 1;
  return all_finite(state.xhat) && all_finite(state.r_prev);
}

template <class Denoiser>
Trajectory run_coupled(const SensingOperator& op, const std::vector<cplx>& y,
                       const Denoiser& denoiser,
                       const std::vector<SeProfile>& profiles,
                       const AmpConfig& cfg, const std::vector<cplx>& truth) {
  if (cfg.t_max < 1) throw std::invalid_argument("run_coupled: t_max >= 1");
  Trajectory traj;
  AmpState state = AmpState::initial(op.cols(), op.rows());
  double initial_mse = mse_empirical(state.xhat, truth);
  traj.mse_by_iter.push_back(initial_mse);
  traj.recorded.push_back({1, initial_mse});
  for (int t = 1; t <= cfg.t_max; ++t) {
    const bool ok = coupled_step(state, op, y, denoiser,
                                 profile_at(profiles, t - 1).phi, cfg);
    const double mse = mse_empirical(state.xhat, truth);
    traj.mse_by_iter.push_back(mse);
    if ((state.t % std::max(1, cfg.record_every)) == 0)
      traj.recorded.push_back({state.t, mse});
    traj.iterations = state.t;
    if (!ok || !std::isfinite(mse) ||
        mse > cfg.divergence_factor * std::max(initial_mse, 1e-300)) {
      traj.status = AmpStatus::diverged;
      traj.final_mse = mse;
      return traj;
    }
    const std::size_t k = traj.mse_by_iter.size();
    if (k > 10 &&
        std::abs(traj.mse_by_iter[k - 1] - traj.mse_by_iter[k - 11]) <
            cfg.stagnation_tol) {
      traj.status = AmpStatus::converged;
      break;
    }
  }
  traj.final_mse = traj.mse_by_iter.back();
  return traj;
}

}  // namespace detail

/// One spatially-coupled AMP iteration with the posterior-expectation
/// denoiser; phi must be the SE profile matched to the state's iteration.
inline bool sc_amp_step(AmpState& state, const SensingOperator& op,
                        const std::vector<cplx>& y, const BgPrior& prior,
                        const SeProfile& phi, const AmpConfig& cfg = {}) {
  if (phi.phi.size() != static_cast<std::size_t>(op.rows()))
    throw std::invalid_argument("sc_amp_step: profile length mismatch");
  return detail::coupled_step(state, op, y,
                              PosteriorExpectationDenoiser{prior}, phi.phi,
                              cfg);
}

/// One coupled iteration with the soft-threshold denoiser at scale
/// alpha_star (theta_i = alpha_star / sqrt(s_i)).
inline bool camp_step(AmpState& state, const SensingOperator& op,
                      const std::vector<cplx>& y, double alpha_star,
                      const SeProfile& phi, const AmpConfig& cfg = {}) {
  if (!(alpha_star > 0.0)) throw std::invalid_argument("camp_step: alpha > 0");
  if (phi.phi.size() != static_cast<std::size_t>(op.rows()))
    throw std::invalid_argument("camp_step: profile length mismatch");
  return detail::coupled_step(state, op, y, SoftThresholdDenoiser{alpha_star},
                              phi.phi, cfg);
}

/// Full coupled run with the posterior-expectation denoiser; `profiles` is
/// the matching SE trajectory, AMP iteration t consumes profiles[t-1].
inline Trajectory run_scheme1(const SensingOperator& op,
                              const std::vector<cplx>& y, const BgPrior& prior,
                              const std::vector<SeProfile>& profiles,
                              const AmpConfig& cfg,
                              const std::vector<cplx>& truth) {
  return detail::run_coupled(op, y, PosteriorExpectationDenoiser{prior},
                             profiles, cfg, truth);
}

/// Full coupled run with the soft-threshold denoiser (profiles from
/// se_camp_run at the same alpha).
inline Trajectory run_scheme3(const SensingOperator& op,
                              const std::vector<cplx>& y, double alpha_star,
                              const std::vector<SeProfile>& profiles,
                              const AmpConfig& cfg,
                              const std::vector<cplx>& truth) {
  return detail::run_coupled(op, y, SoftThresholdDenoiser{alpha_star},
                             profiles, cfg, truth);
}

namespace detail {

// Uncoupled complex AMP over random-time sampling operators. The literal
// recursion assumes unit column norms, so the operator (unit rows, column
// norm sqrt(delta)) and the measurements are rescaled by 1/sqrt(delta):
//   r^t = y~ - A~ xhat^t + (1/delta)(<d eta> r^{t-1} + <dbar eta> conj(r^{t-1}))
//   v^t = xhat^t + A~^* r^t,  xhat^{t+1} = eta(v; s = 1/phi_t).
struct IidRunner {
  const SensingOperator& op;
  std::vector<cplx> y_scaled;
  double delta;
  double inv_sqrt_delta;

  IidRunner(const SensingOperator& op_, const std::vector<cplx>& y)
      : op(op_), y_scaled(y) {
    delta = static_cast<double>(op.rows()) / op.cols();
    inv_sqrt_delta = 1.0 / std::sqrt(delta);
    for (auto& v : y_scaled) v *= inv_sqrt_delta;
  }

  bool step(AmpState& state, const BgPrior& prior, double phi_t,
            double b_mean, cplx d_mean, double& b_mean_out, cplx& d_mean_out,
            const AmpConfig& cfg) const {
    const int n = op.cols();
    const int m = op.rows();
    std::vector<cplx> r = op.apply(state.xhat);
    for (int a = 0; a < m; ++a) {
      r[a] = y_scaled[a] - inv_sqrt_delta * r[a] +
             (b_mean / delta) * state.r_prev[a] +
             (d_mean / delta) * std::conj(state.r_prev[a]);
    }
    std::vector<cplx> z = op.adjoint_apply(r);
    const double s =
        std::clamp(1.0 / std::max(phi_t, cfg.phi_floor), 1e-12, 1e12);
    double b_acc = 0.0;
    cplx d_acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const cplx v = state.xhat[i] + inv_sqrt_delta * z[i];
      const DenoiserEval ev = posterior_mean_derivs(v, s, prior);
      state.xhat[i] = ev.value;
      b_acc += ev.d_v.real();
      d_acc += ev.d_vbar;
    }
    b_mean_out = b_acc / n;
    d_mean_out = d_acc / static_cast<double>(n);
    state.r_prev.swap(r);
    state.t += 1;
    return all_finite(state.xhat) && all_finite(state.r_prev);
  }
};

}  // namespace detail

/// One uncoupled AMP iteration; phi_scalar is the scalar SE value matched to
/// this iteration. The Onsager means are carried inside the state vectors
/// (uniform across rows).
inline bool iid_amp_step(AmpState& state, const SensingOperator& op,
                         const std::vector<cplx>& y, const BgPrior& prior,
                         double phi_scalar, const AmpConfig& cfg = {}) {
  detail::IidRunner runner(op, y);
  const double b_mean = state.onsager_b.empty() ? 0.0 : state.onsager_b[0];
  const cplx d_mean = state.onsager_d.empty() ? cplx{0.0, 0.0}
                                              : state.onsager_d[0];
  double b_out = 0.0;
  cplx d_out{0.0, 0.0};
  const bool ok =
      runner.step(state, prior, phi_scalar, b_mean, d_mean, b_out, d_out, cfg);
  std::fill(state.onsager_b.begin(), state.onsager_b.end(), b_out);
  std::fill(state.onsager_d.begin(), state.onsager_d.end(), d_out);
  return ok;
}

/// Full uncoupled run; phis is the scalar SE sequence (phis[0] = Var(X)/delta),
/// iteration t consumes phis[t-1] with fixed-point extension.
inline Trajectory run_scheme2(const SensingOperator& op,
                              const std::vector<cplx>& y, const BgPrior& prior,
                              const std::vector<double>& phis,
                              const AmpConfig& cfg,
                              const std::vector<cplx>& truth) {
  if (cfg.t_max < 1) throw std::invalid_argument("run_scheme2: t_max >= 1");
  if (phis.empty()) throw std::invalid_argument("run_scheme2: empty SE");
  detail::IidRunner runner(op, y);
  Trajectory traj;
  AmpState state = AmpState::initial(op.cols(), op.rows());
  const double initial_mse = mse_empirical(state.xhat, truth);
  traj.mse_by_iter.push_back(initial_mse);
  traj.recorded.push_back({1, initial_mse});
  double b_mean = 0.0;
  cplx d_mean{0.0, 0.0};
  for (int t = 1; t <= cfg.t_max; ++t) {
    const double phi_t =
        phis[std::min<std::size_t>(static_cast<std::size_t>(t - 1),
                                   phis.size() - 1)];
    double b_out = 0.0;
    cplx d_out{0.0, 0.0};
    const bool ok = runner.step(state, prior, phi_t, b_mean, d_mean, b_out,
                                d_out, cfg);
    b_mean = b_out;
    d_mean = d_out;
    const double mse = mse_empirical(state.xhat, truth);
    traj.mse_by_iter.push_back(mse);
    if ((state.t % std::max(1, cfg.record_every)) == 0)
      traj.recorded.push_back({state.t, mse});
    traj.iterations = state.t;
    if (!ok || !std::isfinite(mse) ||
        mse > cfg.divergence_factor * std::max(initial_mse, 1e-300)) {
      traj.status = AmpStatus::diverged;
      traj.final_mse = mse;
      return traj;
    }
    const std::size_t k = traj.mse_by_iter.size();
    if (k > 10 &&
        std::abs(traj.mse_by_iter[k - 1] - traj.mse_by_iter[k - 11]) <
            cfg.stagnation_tol) {
      traj.status = AmpStatus::converged;
      break;
    }
  }
  traj.final_mse = traj.mse_by_iter.back();
  return traj;
}

}  // namespace scsamp
