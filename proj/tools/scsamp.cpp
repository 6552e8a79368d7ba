// Command-line front end for the spatially-coupled subsampling experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical divergence in
// more than half of the instances.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scsamp/experiments.hpp"
#include "scsamp/svg_plot.hpp"

namespace {

scsamp::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return scsamp::ExperimentConfig{};
  return scsamp::ExperimentConfig::from_json_file(path);
}

int exit_code_for_divergence(int diverged, int total) {
  return (total > 0 && 2 * diverged > total) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatially coupled subsampling: state evolution and AMP experiments"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for Monte Carlo sweeps")
      ->capture_default_str();

  // evolve
  auto* evolve = app.add_subcommand("evolve", "state-evolution profile trajectory");
  std::string ev_config, ev_out, ev_svg;
  std::uint64_t ev_seed = 0;
  bool ev_seed_set = false;
  evolve->add_option("--config", ev_config, "JSON config file");
  evolve->add_option("--out", ev_out, "profile CSV output")->required();
  evolve->add_option("--svg", ev_svg, "optional SVG rendering");
  evolve->add_option("--seed", ev_seed, "master seed override");

  // mse
  auto* mse = app.add_subcommand("mse", "empirical AMP MSE versus SE prediction");
  std::string mse_config, mse_out, mse_svg, mse_traj_dir;
  int mse_instances = 0;
  std::uint64_t mse_seed = 0;
  bool mse_seed_set = false;
  mse->add_option("--config", mse_config, "JSON config file");
  mse->add_option("--instances", mse_instances, "Monte Carlo instances")
      ->required();
  mse->add_option("--out", mse_out, "MSE CSV output")->required();
  mse->add_option("--svg", mse_svg, "optional SVG rendering");
  mse->add_option("--seed", mse_seed, "master seed override");

  // phase
  auto* phase = app.add_subcommand("phase", "phase-transition sweep with logit fit");
  std::string ph_config, ph_scheme, ph_grid, ph_out, ph_fit, ph_svg;
  double ph_epsilon = 0.0;
  int ph_instances = 0;
  std::uint64_t ph_seed = 0;
  bool ph_seed_set = false;
  phase->add_option("--config", ph_config, "JSON config file");
  phase->add_option("--scheme", ph_scheme, "I, II or III")->required();
  phase->add_option("--epsilon", ph_epsilon, "nonzero probability")->required();
  phase->add_option("--delta-grid", ph_grid, "start:stop:step")->required();
  phase->add_option("--instances", ph_instances, "instances per grid point")
      ->required();
  phase->add_option("--out", ph_out, "per-point CSV output")->required();
  phase->add_option("--fit", ph_fit, "fit summary JSON output")->required();
  phase->add_option("--svg", ph_svg, "optional SVG rendering");
  phase->add_option("--seed", ph_seed, "master seed override");

  // threshold
  auto* thr = app.add_subcommand("threshold",
                                 "uncoupled posterior-expectation SE boundary");
  double thr_epsilon = 0.0;
  std::string thr_out;
  thr->add_option("--epsilon", thr_epsilon, "nonzero probability")->required();
  thr->add_option("--out", thr_out, "optional CSV output");

  CLI11_PARSE(app, argc, argv);
  ev_seed_set = evolve->count("--seed") > 0;
  mse_seed_set = mse->count("--seed") > 0;
  ph_seed_set = phase->count("--seed") > 0;

  try {
    if (*evolve) {
      scsamp::ExperimentConfig cfg = load_config(ev_config);
      if (ev_seed_set) cfg.seed = ev_seed;
      cfg.validate();
      if (cfg.ensemble().seed_fraction_heavy())
        std::cerr << "warning: seed rows exceed 10% of n; the undersampling "
                     "ratio is no longer close to delta\n";
      const scsamp::ProfileResult res = scsamp::run_profile_experiment(cfg);
      scsamp::write_profile_csv(res, ev_out);
      if (!ev_svg.empty())
        scsamp::emit_plot(ev_out, scsamp::PlotKind::profile, ev_svg);
      return 0;
    }
    if (*mse) {
      scsamp::ExperimentConfig cfg = load_config(mse_config);
      if (mse_seed_set) cfg.seed = mse_seed;
      cfg.validate();
      const scsamp::MseComparison res =
          scsamp::run_mse_comparison(cfg, mse_instances, threads);
      scsamp::write_mse_csv(res, mse_out);
      if (!mse_svg.empty())
        scsamp::emit_plot(mse_out, scsamp::PlotKind::mse, mse_svg);
      std::cout << "instances=" << res.instances
                << " diverged=" << res.diverged << "\n";
      return exit_code_for_divergence(res.diverged, res.instances);
    }
    if (*phase) {
      scsamp::ExperimentConfig cfg = load_config(ph_config);
      if (ph_seed_set) cfg.seed = ph_seed;
      cfg.scheme = ph_scheme;
      cfg.epsilon = ph_epsilon;
      cfg.sigma = 0.0;  // phase sweeps are noiseless
      const std::vector<double> grid = scsamp::parse_delta_grid(ph_grid);
      const scsamp::PhaseSweepResult res = scsamp::run_phase_sweep(
          cfg, ph_scheme, ph_epsilon, grid, ph_instances, threads);
      scsamp::write_phase_csv(res, ph_out);
      scsamp::write_fit_json(res, ph_epsilon, ph_fit);
      if (!ph_svg.empty())
        scsamp::emit_plot(ph_out, scsamp::PlotKind::phase, ph_svg);
      std::cout << "delta_c=" << res.fit.delta_c;
      for (const auto& f : res.fit.flags) std::cout << " flag:" << f;
      std::cout << "\n";
      return exit_code_for_divergence(res.diverged, res.total_instances);
    }
    if (*thr) {
      const scsamp::ThresholdResult res = scsamp::renyi_threshold(thr_epsilon);
      std::cout << "epsilon=" << res.epsilon
                << " delta_tilde=" << res.delta_tilde << " s_star=" << res.s_star
                << "\n";
      if (!thr_out.empty()) scsamp::write_threshold_csv({res}, thr_out);
      return 0;
    }
  } catch (const scsamp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
