#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "scsamp/amp.hpp"
#include "scsamp/logit.hpp"
#include "scsamp/rng.hpp"
#include "scsamp/scalar_channel.hpp"
#include "scsamp/sensing_ensemble.hpp"
#include "scsamp/state_evolution.hpp"

namespace scsamp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat experiment configuration; the JSON config file carries exactly these
/// keys (all optional, unknown keys rejected).
struct ExperimentConfig {
  int n = 1000;
  int m1 = 20;
  int L = 3;
  int ell = 160;
  double xi = 0.5;
  double delta = 0.15;
  double sigma = 0.001;
  double epsilon = 0.1;
  std::string scheme = "I";
  int instances = 20;
  int t_max = 0;           // 0: derive 4*m
  std::uint64_t seed = 1;
  double success_threshold = 0.0;  // 0: derive 1e-4 * epsilon
  std::string delta_grid;          // "start:stop:step"
  std::vector<double> epsilon_list;
  int record_every = 1;

  EnsembleParams ensemble() const {
    return EnsembleParams(n, m1, L, ell, xi, delta, sigma);
  }
  EnsembleParams ensemble_at(double delta_override, double sigma_override) const {
    return EnsembleParams(n, m1, L, ell, xi, delta_override, sigma_override);
  }
  int derived_t_max(int m) const { return t_max > 0 ? t_max : 4 * m; }
  double derived_success_threshold() const {
    return success_threshold > 0.0 ? success_threshold : 1e-4 * epsilon;
  }

  void validate() const {
    if (!(epsilon > 0.0) || !(epsilon <= 1.0))
      throw ConfigError("config: epsilon must lie in (0, 1]");
    if (scheme != "I" && scheme != "II" && scheme != "III")
      throw ConfigError("config: scheme must be I, II or III");
    if (instances < 1) throw ConfigError("config: instances >= 1");
    if (record_every < 1) throw ConfigError("config: record_every >= 1");
    if (t_max < 0) throw ConfigError("config: t_max >= 0");
    ensemble();  // range-checks the ensemble parameters
  }

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_file(const std::string& path);
};

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n") cfg.n = value.get<int>();
      else if (key == "m1") cfg.m1 = value.get<int>();
      else if (key == "L") cfg.L = value.get<int>();
      else if (key == "ell") cfg.ell = value.get<int>();
      else if (key == "xi") cfg.xi = value.get<double>();
      else if (key == "delta") cfg.delta = value.get<double>();
      else if (key == "sigma") cfg.sigma = value.get<double>();
      else if (key == "epsilon") cfg.epsilon = value.get<double>();
      else if (key == "scheme") cfg.scheme = value.get<std::string>();
      else if (key == "instances") cfg.instances = value.get<int>();
      else if (key == "t_max") cfg.t_max = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "success_threshold")
        cfg.success_threshold = value.get<double>();
      else if (key == "delta_grid") cfg.delta_grid = value.get<std::string>();
      else if (key == "epsilon_list")
        cfg.epsilon_list = value.get<std::vector<double>>();
      else if (key == "record_every") cfg.record_every = value.get<int>();
      else throw ConfigError("config: unknown key \"" + key + "\"");
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value for key \"" + key + "\"");
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig ExperimentConfig::from_json_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  return from_json(j);
}

/// Deterministic, collision-free per-instance seed from a master seed, an
/// experiment identifier, and the instance index (counter-mode hash).
inline std::uint64_t seed_plan(std::uint64_t master_seed,
                               std::string_view experiment_id,
                               std::uint64_t instance_index) {
  std::uint64_t h = splitmix64(master_seed ^ fnv1a64(experiment_id));
  return splitmix64(h ^ instance_index);
}

/// "a:b:step" -> inclusive grid a, a+step, ..., b.
inline std::vector<double> parse_delta_grid(const std::string& text) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || b < a)
    throw ConfigError("delta_grid: expected start:stop:step with step > 0");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double d = a + k * step;
    if (d > b + 0.5 * step) break;
    grid.push_back(std::min(d, b));
  }
  if (grid.empty()) throw ConfigError("delta_grid: empty grid");
  return grid;
}

/// Index-addressed parallel loop; results must be written by index so the
/// output is independent of scheduling and worker count.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, count);
  pool.reserve(k);
  for (int w = 0; w < k; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profile evolution
// ---------------------------------------------------------------------------

struct ProfileRow {
  int t;
  int row_index;
  double phi;
};

struct ProfileResult {
  std::vector<ProfileRow> rows;
  std::vector<SeProfile> trajectory;
};

/// State-evolution profile trajectory for one operator draw; rows are emitted
/// at t = 1, 5, every record_every-th iteration, and the final iteration.
inline ProfileResult run_profile_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scheme != "I")
    throw ConfigError("profile experiment: scheme I config required");
  Rng rng(seed_plan(cfg.seed, "evolve", 0));
  const SensingOperator op = build_spatially_coupled(cfg.ensemble(), rng);
  const BgPrior prior(cfg.epsilon);
  const int t_max = cfg.derived_t_max(op.rows());
  ProfileResult out;
  out.trajectory = se_sc_run(op, cfg.sigma, prior, t_max);
  const int t_last = static_cast<int>(out.trajectory.size()) - 1;
  auto want = [&](int t) {
    return t == 1 || t == 5 || t == t_last ||
           (t % std::max(1, cfg.record_every)) == 0;
  };
  for (int t = 1; t <= t_last; ++t) {
    if (!want(t)) continue;
    const auto& phi = out.trajectory[t].phi;
    for (int a = 0; a < static_cast<int>(phi.size()); ++a)
      out.rows.push_back({t, a, phi[a]});
  }
  return out;
}

inline void write_profile_csv(const ProfileResult& res,
                              const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << "t,row_index,phi\n";
  for (const auto& r : res.rows)
    outf << r.t << "," << r.row_index << "," << detail::fmt_double(r.phi)
         << "\n";
}

// ---------------------------------------------------------------------------
// MSE comparison
// ---------------------------------------------------------------------------

struct MseRow {
  int t;
  double mse_amp_mean;
  double mse_amp_stderr;
  double mse_se;
};

struct MseComparison {
  std::vector<MseRow> rows;
  int instances = 0;
  int diverged = 0;
};

/// Empirical AMP MSE (mean and standard error over M instances, each with its
/// own operator draw and matching SE trajectory) against the mean SE
/// prediction, per iteration. Instances stopping early hold their final value.
inline MseComparison run_mse_comparison(const ExperimentConfig& cfg,
                                        int instances, int threads) {
  cfg.validate();
  if (cfg.scheme != "I")
    throw ConfigError("mse experiment: scheme I config required");
  if (instances < 1) throw ConfigError("mse experiment: instances >= 1");
  const BgPrior prior(cfg.epsilon);
  const EnsembleParams params = cfg.ensemble();
  const int t_max = cfg.derived_t_max(params.rows());

  struct InstanceOut {
    std::vector<double> mse_amp;  // index t-1
    std::vector<double> mse_se;
    bool diverged = false;
  };
  std::vector<InstanceOut> outs(instances);

  parallel_for(instances, threads, [&](int idx) {
    Rng rng(seed_plan(cfg.seed, "mse", static_cast<std::uint64_t>(idx)));
    const SensingOperator op = build_spatially_coupled(params, rng);
    const std::vector<cplx> truth = sample_signal(cfg.n, prior, rng);
    const Measurements meas = op.measure(truth, rng);
    const std::vector<SeProfile> profiles =
        se_sc_run(op, cfg.sigma, prior, t_max);
    AmpConfig acfg;
    acfg.t_max = t_max;
    acfg.record_every = cfg.record_every;
    const Trajectory traj =
        run_scheme1(op, meas.y, prior, profiles, acfg, truth);

    InstanceOut& io = outs[idx];
    io.diverged = traj.status == AmpStatus::diverged;
    io.mse_amp.assign(t_max, traj.final_mse);
    for (int t = 1; t <= t_max; ++t) {
      const std::size_t k = static_cast<std::size_t>(t - 1);
      if (k < traj.mse_by_iter.size()) io.mse_amp[k] = traj.mse_by_iter[k];
    }
    // Predicted MSE of xhat^t comes from the profile consumed one step
    // earlier; xhat^1 is the prior mean with MSE = E|X|^2.
    const MonotoneCubicTable table = make_channel_mse_table(prior);
    io.mse_se.assign(t_max, prior.second_moment());
    for (int t = 2; t <= t_max; ++t)
      io.mse_se[t - 1] =
          mse_se_prediction(profile_at(profiles, t - 2), op, table);
  });

  MseComparison result;
  result.instances = instances;
  for (const auto& io : outs)
    if (io.diverged) ++result.diverged;
  const int live = instances - result.diverged;
  if (live == 0) return result;

  for (int t = 1; t <= t_max; ++t) {
    if ((t % std::max(1, cfg.record_every)) != 0 && t != 1 && t != t_max)
      continue;
    double sum = 0.0, sum_sq = 0.0, se_sum = 0.0;
    for (const auto& io : outs) {
      if (io.diverged) continue;
      const double v = io.mse_amp[t - 1];
      sum += v;
      sum_sq += v * v;
      se_sum += io.mse_se[t - 1];
    }
    const double mean = sum / live;
    double stderr_v = 0.0;
    if (live > 1) {
      const double var =
          std::max(0.0, (sum_sq - live * mean * mean) / (live - 1.0));
      stderr_v = std::sqrt(var / live);
    }
    result.rows.push_back({t, mean, stderr_v, se_sum / live});
  }
  return result;
}

inline void write_mse_csv(const MseComparison& res, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << "t,mse_amp_mean,mse_amp_stderr,mse_se\n";
  for (const auto& r : res.rows)
    outf << r.t << "," << detail::fmt_double(r.mse_amp_mean) << ","
         << detail::fmt_double(r.mse_amp_stderr) << ","
         << detail::fmt_double(r.mse_se) << "\n";
}

/// Per-instance trajectory export (t, mse_amp).
inline void write_trajectory_csv(const Trajectory& traj,
                                 const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << "t,mse_amp\n";
  for (std::size_t k = 0; k < traj.mse_by_iter.size(); ++k)
    outf << (k + 1) << "," << detail::fmt_double(traj.mse_by_iter[k]) << "\n";
}

// ---------------------------------------------------------------------------
// Phase sweep
// ---------------------------------------------------------------------------

struct PhasePoint {
  double epsilon;
  double delta;
  int instances;
  int successes;
};

struct PhaseSweepResult {
  std::vector<PhasePoint> points;
  LogitFit fit;
  int diverged = 0;
  int total_instances = 0;
};

/// Noiseless success/failure sweep over a delta grid at one sparsity, for one
/// scheme; success means final AMP MSE at most the (scale-aware) threshold.
/// The logit fit of the success curve estimates the transition location.
inline PhaseSweepResult run_phase_sweep(const ExperimentConfig& cfg,
                                        const std::string& scheme,
                                        double epsilon,
                                        const std::vector<double>& delta_grid,
                                        int instances, int threads,
                                        int epsilon_index = 0) {
  if (scheme != "I" && scheme != "II" && scheme != "III")
    throw ConfigError("phase sweep: scheme must be I, II or III");
  if (delta_grid.empty()) throw ConfigError("phase sweep: empty delta grid");
  if (instances < 1) throw ConfigError("phase sweep: instances >= 1");
  const BgPrior prior(epsilon);
  const double threshold = cfg.success_threshold > 0.0
                               ? cfg.success_threshold
                               : 1e-4 * epsilon;
  const int n_delta = static_cast<int>(delta_grid.size());
  const int total = n_delta * instances;
  std::vector<std::uint8_t> success(total, 0);
  std::vector<std::uint8_t> diverged(total, 0);

  double alpha_star = 0.0;
  if (scheme == "III") alpha_star = tune_alpha(prior).alpha_star;

  // Scheme II SE sequences are operator-independent; precompute per delta.
  std::vector<std::vector<double>> iid_phis(n_delta);
  if (scheme == "II") {
    for (int di = 0; di < n_delta; ++di) {
      const int m = static_cast<int>(cfg.n * delta_grid[di]);
      const int t_max = cfg.derived_t_max(m);
      iid_phis[di] = se_iid_run(delta_grid[di], 0.0, prior, t_max).phi;
    }
  }

  const std::string exp_id =
      "phase/" + scheme + "/" + std::to_string(epsilon_index);
  parallel_for(total, threads, [&](int task) {
    const int di = task / instances;
    const int inst = task % instances;
    const double delta = delta_grid[di];
    Rng rng(seed_plan(cfg.seed, exp_id,
                      static_cast<std::uint64_t>(di) * instances + inst));
    const std::vector<cplx> truth = sample_signal(cfg.n, prior, rng);
    Trajectory traj;
    if (scheme == "II") {
      const int m = static_cast<int>(cfg.n * delta);
      const SensingOperator op = build_random_fourier(cfg.n, m, rng, 0.0);
      const Measurements meas = op.measure(truth, rng);
      AmpConfig acfg;
      acfg.t_max = cfg.derived_t_max(m);
      traj = run_scheme2(op, meas.y, prior, iid_phis[di], acfg, truth);
    } else {
      const EnsembleParams params = cfg.ensemble_at(delta, 0.0);
      const SensingOperator op = build_spatially_coupled(params, rng);
      const Measurements meas = op.measure(truth, rng);
      AmpConfig acfg;
      acfg.t_max = cfg.derived_t_max(op.rows());
      if (scheme == "I") {
        const std::vector<SeProfile> profiles =
            se_sc_run(op, 0.0, prior, acfg.t_max);
        traj = run_scheme1(op, meas.y, prior, profiles, acfg, truth);
      } else {
        const std::vector<SeProfile> profiles =
            se_camp_run(op, prior, alpha_star, acfg.t_max);
        traj = run_scheme3(op, meas.y, alpha_star, profiles, acfg, truth);
      }
    }
    if (traj.status == AmpStatus::diverged) diverged[task] = 1;
    else if (traj.final_mse <= threshold) success[task] = 1;
  });

  PhaseSweepResult result;
  result.total_instances = total;
  std::vector<LogitPoint> fit_points;
  for (int di = 0; di < n_delta; ++di) {
    int succ = 0;
    for (int inst = 0; inst < instances; ++inst) {
      const int task = di * instances + inst;
      succ += success[task];
      result.diverged += diverged[task];
    }
    result.points.push_back({epsilon, delta_grid[di], instances, succ});
    fit_points.push_back({delta_grid[di], succ, instances});
  }
  result.fit = fit_logit(fit_points);
  if (std::isfinite(result.fit.delta_c) &&
      (result.fit.delta_c < delta_grid.front() ||
       result.fit.delta_c > delta_grid.back()))
    result.fit.flags.push_back("extrapolated");
  return result;
}

inline void write_phase_csv(const PhaseSweepResult& res,
                            const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << "epsilon,delta,instances,successes,success_rate\n";
  for (const auto& p : res.points)
    outf << detail::fmt_double(p.epsilon) << "," << detail::fmt_double(p.delta)
         << "," << p.instances << "," << p.successes << ","
         << detail::fmt_double(static_cast<double>(p.successes) / p.instances)
         << "\n";
}

inline void write_fit_json(const PhaseSweepResult& res, double epsilon,
                           const std::string& path) {
  nlohmann::json j;
  j["epsilon"] = epsilon;
  j["delta_c"] = res.fit.delta_c;
  j["beta"] = res.fit.beta;
  j["ci_low"] = res.fit.ci_low;
  j["ci_high"] = res.fit.ci_high;
  j["flags"] = res.fit.flags;
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << j.dump(2) << "\n";
}

/// Threshold table row export.
inline void write_threshold_csv(const std::vector<ThresholdResult>& rows,
                                const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write " + path);
  outf << "epsilon,delta_tilde,s_star\n";
  for (const auto& r : rows)
    outf << detail::fmt_double(r.epsilon) << ","
         << detail::fmt_double(r.delta_tilde) << ","
         << detail::fmt_double(r.s_star) << "\n";
}

}  // namespace scsamp
