#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "scsamp/experiments.hpp"
#include "scsamp/svg_plot.hpp"

using namespace scsamp;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const std::string& name) {
  return std::string("scsamp_test_") + name;
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("seed plan determinism and spread") {
  CHECK(seed_plan(1, "phase/I/0", 7) == seed_plan(1, "phase/I/0", 7));
  CHECK(seed_plan(1, "phase/I/0", 7) != seed_plan(1, "phase/I/0", 8));
  CHECK(seed_plan(1, "phase/I/0", 7) != seed_plan(1, "phase/II/0", 7));
  CHECK(seed_plan(1, "phase/I/0", 7) != seed_plan(2, "phase/I/0", 7));

  std::set<std::uint64_t> seen;
  for (std::uint64_t idx = 0; idx < 1000000; ++idx)
    seen.insert(seed_plan(31337, "collision-scan", idx));
  CHECK(seen.size() == 1000000);
}

TEST_CASE("logit fit on planted logistic data") {
  const double delta_c = 0.25, beta = 0.01;
  std::vector<LogitPoint> pts;
  Rng rng(1234);
  for (int k = 0; k <= 10; ++k) {
    const double d = 0.20 + 0.01 * k;
    const double p = 1.0 / (1.0 + std::exp(-(d - delta_c) / beta));
    std::binomial_distribution<int> binom(100, p);
    pts.push_back({d, binom(rng), 100});
  }
  const LogitFit fit = fit_logit(pts);
  INFO("delta_c=" << fit.delta_c << " beta=" << fit.beta);
  CHECK(fit.flags.empty());
  CHECK(std::abs(fit.delta_c - delta_c) < 0.005);
  CHECK(fit.beta == Approx(beta).epsilon(0.5));
  CHECK(fit.ci_low < fit.delta_c);
  CHECK(fit.ci_high > fit.delta_c);
  CHECK(fit.ci_high - fit.ci_low < 0.02);
}

TEST_CASE("logit fit fallback and degenerate branches") {
  // perfectly separated at 0.2 / 0.3
  const LogitFit sep = fit_logit({{0.2, 0, 20}, {0.3, 20, 20}});
  CHECK(sep.delta_c == Approx(0.25));
  CHECK(sep.flagged("separated"));

  // single mixed point
  const LogitFit single = fit_logit({{0.25, 10, 20}});
  CHECK(single.flagged("degenerate"));

  // all success / all failure
  const LogitFit up = fit_logit({{0.2, 20, 20}, {0.3, 20, 20}});
  CHECK(up.flagged("all_success"));
  CHECK(up.delta_c == Approx(0.2));
  const LogitFit down = fit_logit({{0.2, 0, 20}, {0.3, 0, 20}});
  CHECK(down.flagged("all_failure"));
  CHECK(down.delta_c == Approx(0.3));
}

TEST_CASE("delta grid parsing") {
  const auto grid = parse_delta_grid("0.18:0.32:0.01");
  REQUIRE(grid.size() == 15);
  CHECK(grid.front() == Approx(0.18));
  CHECK(grid.back() == Approx(0.32));
  CHECK_THROWS_AS(parse_delta_grid("0.3:0.2:0.01"), ConfigError);
  CHECK_THROWS_AS(parse_delta_grid("0.1:0.2:0"), ConfigError);
  CHECK_THROWS_AS(parse_delta_grid("nonsense"), ConfigError);
}

TEST_CASE("config parsing is strict") {
  const ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json{
      {"n", 500}, {"epsilon", 0.2}, {"sigma", 0.01}, {"scheme", "II"}});
  CHECK(cfg.n == 500);
  CHECK(cfg.epsilon == 0.2);
  CHECK(cfg.m1 == 20);  // untouched defaults

  CHECK_THROWS_AS(
      ExperimentConfig::from_json(nlohmann::json{{"unknown_key", 1}}),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"n", "text"}}),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(nlohmann::json{{"epsilon", 1.7}}),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(nlohmann::json{{"scheme", "IV"}}),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::array({1, 2})),
                  ConfigError);
  // delta too large for the seed rows
  CHECK_THROWS_AS(ExperimentConfig::from_json(
                      nlohmann::json{{"n", 100}, {"delta", 0.99}}),
                  ConfigError);
}

TEST_CASE("profile experiment emits the schema and the wave collapses") {
  ExperimentConfig cfg;
  cfg.n = 400;
  cfg.m1 = 10;
  cfg.L = 3;
  cfg.ell = 64;
  cfg.delta = 0.2;
  cfg.sigma = 0.002;
  cfg.epsilon = 0.1;
  cfg.record_every = 10;
  cfg.seed = 5;
  const ProfileResult res = run_profile_experiment(cfg);
  REQUIRE_FALSE(res.rows.empty());
  // final profile uniformly at the noise scale
  const auto& last = res.trajectory.back();
  for (double v : last.phi) CHECK(v < 100 * cfg.sigma * cfg.sigma);

  const std::string csv = tmp_path("profile.csv");
  write_profile_csv(res, csv);
  const std::string text = slurp(csv);
  CHECK(text.rfind("t,row_index,phi\n", 0) == 0);

  const std::string svg = tmp_path("profile.svg");
  emit_plot(csv, PlotKind::profile, svg);
  const std::string svg_text = slurp(svg);
  // one polyline per recorded iteration
  std::set<int> ts;
  for (const auto& row : res.rows) ts.insert(row.t);
  CHECK(count_occurrences(svg_text, "<polyline") == static_cast<int>(ts.size()));
  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

TEST_CASE("mse experiment: aggregation, stderr, agreement at small scale") {
  ExperimentConfig cfg;
  cfg.n = 300;
  cfg.m1 = 8;
  cfg.L = 3;
  cfg.ell = 48;
  cfg.delta = 0.25;
  cfg.sigma = 0.002;
  cfg.epsilon = 0.1;
  cfg.seed = 17;
  cfg.t_max = 200;
  const MseComparison res = run_mse_comparison(cfg, 8, 2);
  CHECK(res.diverged == 0);
  REQUIRE_FALSE(res.rows.empty());
  // first iteration: estimate is the prior mean, MSE ~ eps, SE predicts eps
  CHECK(res.rows.front().t == 1);
  CHECK(res.rows.front().mse_se == Approx(0.1).margin(1e-6));
  CHECK(res.rows.front().mse_amp_mean == Approx(0.1).margin(0.05));
  // final row at the noise floor
  CHECK(res.rows.back().mse_amp_mean < 100 * cfg.sigma * cfg.sigma);

  // M = 1 degenerate: stderr column all zero
  const MseComparison one = run_mse_comparison(cfg, 1, 1);
  for (const auto& row : one.rows) CHECK(row.mse_amp_stderr == 0.0);

  const std::string csv = tmp_path("mse.csv");
  write_mse_csv(res, csv);
  CHECK(slurp(csv).rfind("t,mse_amp_mean,mse_amp_stderr,mse_se\n", 0) == 0);
  const std::string svg = tmp_path("mse.svg");
  emit_plot(csv, PlotKind::mse, svg);
  const std::string svg_text = slurp(svg);
  CHECK(count_occurrences(svg_text, "class=\"errbar\"") ==
        static_cast<int>(res.rows.size()));
  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

TEST_CASE("phase sweep on a coarse grid is deterministic across threads") {
  ExperimentConfig cfg;
  cfg.n = 200;
  cfg.m1 = 6;
  cfg.L = 3;
  cfg.ell = 32;
  cfg.epsilon = 0.2;
  cfg.seed = 23;
  cfg.t_max = 300;
  const std::vector<double> grid{0.15, 0.25, 0.35, 0.45};
  const PhaseSweepResult r1 = run_phase_sweep(cfg, "I", 0.2, grid, 6, 1);
  const PhaseSweepResult r8 = run_phase_sweep(cfg, "I", 0.2, grid, 6, 8);

  const std::string c1 = tmp_path("phase1.csv"), c8 = tmp_path("phase8.csv");
  write_phase_csv(r1, c1);
  write_phase_csv(r8, c8);
  CHECK(slurp(c1) == slurp(c8));
  CHECK(slurp(c1).rfind("epsilon,delta,instances,successes,success_rate\n", 0) ==
        0);

  const std::string f1 = tmp_path("fit1.json"), f8 = tmp_path("fit8.json");
  write_fit_json(r1, 0.2, f1);
  write_fit_json(r8, 0.2, f8);
  CHECK(slurp(f1) == slurp(f8));
  const auto parsed = nlohmann::json::parse(slurp(f1));
  for (const char* key :
       {"epsilon", "delta_c", "beta", "ci_low", "ci_high", "flags"})
    CHECK(parsed.contains(key));

  // monotone success trend across the coarse grid (allowing flat stretches)
  int first_rate = r1.points.front().successes;
  int last_rate = r1.points.back().successes;
  CHECK(first_rate <= last_rate);

  const std::string svg = tmp_path("phase.svg");
  emit_plot(c1, PlotKind::phase, svg);
  const std::string svg_text = slurp(svg);
  CHECK(count_occurrences(svg_text, "<circle") ==
        static_cast<int>(grid.size()));
  for (const std::string& p : {c1, c8, f1, f8, svg}) std::remove(p.c_str());
}

TEST_CASE("emit_plot rejects bad inputs") {
  const std::string csv = tmp_path("empty.csv");
  {
    std::ofstream out(csv);
    out << "t,row_index,phi\n";  // header only
  }
  CHECK_THROWS(emit_plot(csv, PlotKind::profile, tmp_path("never.svg")));
  {
    std::ofstream out(csv);
    out << "a,b\n1,2\n";  // wrong schema
  }
  CHECK_THROWS(emit_plot(csv, PlotKind::mse, tmp_path("never.svg")));
  std::remove(csv.c_str());
  std::ifstream never(tmp_path("never.svg"));
  CHECK_FALSE(never.good());
}

TEST_CASE("trajectory csv export") {
  Trajectory traj;
  traj.mse_by_iter = {0.1, 0.01, 0.001};
  const std::string path = tmp_path("traj.csv");
  write_trajectory_csv(traj, path);
  const std::string text = slurp(path);
  CHECK(text == "t,mse_amp\n1,0.1\n2,0.01\n3,0.001\n");
  std::remove(path.c_str());
}
