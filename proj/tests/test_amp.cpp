#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numeric>

#include "scsamp/amp.hpp"
#include "scsamp/experiments.hpp"

using namespace scsamp;
using Catch::Approx;

namespace {

struct Instance {
  SensingOperator op;
  std::vector<cplx> truth;
  Measurements meas;
};

Instance make_instance(const EnsembleParams& params, const BgPrior& prior,
                       std::uint64_t seed) {
  Rng rng(seed);
  SensingOperator op = build_spatially_coupled(params, rng);
  std::vector<cplx> truth = sample_signal(params.n, prior, rng);
  Measurements meas = op.measure(truth, rng);
  return {std::move(op), std::move(truth), std::move(meas)};
}

}  // namespace

TEST_CASE("mse_empirical basics and accumulation oracle") {
  std::vector<cplx> a{{1, 2}, {3, -1}, {0, 0}};
  CHECK(mse_empirical(a, a) == 0.0);

  // zero estimate of a k-sparse unit-power signal
  std::vector<cplx> truth(100, cplx(0, 0)), zero(100, cplx(0, 0));
  for (int i = 0; i < 10; ++i) truth[i * 7] = cplx(1.0, 0.0);
  CHECK(mse_empirical(zero, truth) == Approx(0.1));

  // reversed-order summation oracle on a random pair
  Rng rng(3);
  std::vector<cplx> u(1000), v(1000);
  for (auto& z : u) z = randn_complex(rng);
  for (auto& z : v) z = randn_complex(rng);
  double rev = 0.0;
  for (int i = 999; i >= 0; --i) rev += std::norm(u[i] - v[i]);
  CHECK(mse_empirical(u, v) == Approx(rev / 1000).epsilon(1e-12));

  CHECK_THROWS_AS(mse_empirical(a, truth), std::invalid_argument);
}

TEST_CASE("Q column normalization identity") {
  Rng rng(5);
  const EnsembleParams params(300, 4, 2, 40, 0.5, 0.25, 0.001);
  const SensingOperator op = build_spatially_coupled(params, rng);
  std::vector<double> phi(op.rows());
  for (int a = 0; a < op.rows(); ++a) phi[a] = 0.01 + 0.001 * (a % 13);
  std::vector<double> inv_phi(op.rows());
  for (int a = 0; a < op.rows(); ++a) inv_phi[a] = 1.0 / phi[a];
  std::vector<double> den(op.cols(), 0.0);
  for (int a = 0; a < op.rows(); ++a)
    op.for_support(a, [&](int col, std::size_t idx) {
      den[col] += op.weight_flat(idx) * inv_phi[a];
    });
  // sum_a Q_ai W_ai = 1 for every column
  for (int i = 0; i < op.cols(); ++i) {
    double acc = 0.0;
    for (int a = 0; a < op.rows(); ++a)
      acc += (inv_phi[a] / den[i]) * op.weight(a, i);
    CHECK(acc == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("noiseless oracle start stays at the fixed point") {
  const EnsembleParams params(200, 4, 2, 24, 0.5, 0.3, 0.0);
  const BgPrior prior(0.15);
  Instance inst = make_instance(params, prior, 11);

  AmpState state = AmpState::initial(200, inst.op.rows());
  state.xhat = inst.truth;
  SeProfile floor_profile;
  floor_profile.phi.assign(inst.op.rows(), 1e-12);
  for (int t = 0; t < 10; ++t) {
    REQUIRE(sc_amp_step(state, inst.op, inst.meas.y, prior, floor_profile));
    const double mse = mse_empirical(state.xhat, inst.truth);
    CHECK(mse < 1e-10);
  }
  // first-step residual is corrected to the zero vector
  AmpState fresh = AmpState::initial(200, inst.op.rows());
  fresh.xhat = inst.truth;
  sc_amp_step(fresh, inst.op, inst.meas.y, prior, floor_profile);
  for (const auto& r : fresh.r_prev) CHECK(std::abs(r) < 1e-8);
}

TEST_CASE("global phase equivariance of the coupled schemes") {
  const EnsembleParams params(150, 3, 2, 16, 0.5, 0.3, 0.0);
  const BgPrior prior(0.2);
  Instance inst = make_instance(params, prior, 13);
  const cplx rot = std::polar(1.0, 1.234);

  auto rotate = [&](const std::vector<cplx>& v) {
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = rot * v[i];
    return out;
  };
  const std::vector<cplx> y_rot = rotate(inst.meas.y);
  const std::vector<cplx> truth_rot = rotate(inst.truth);

  AmpConfig cfg;
  cfg.t_max = 30;
  const auto profiles = se_sc_run(inst.op, 0.0, prior, cfg.t_max);
  const Trajectory t1 = run_scheme1(inst.op, inst.meas.y, prior, profiles, cfg,
                                    inst.truth);
  const Trajectory t2 =
      run_scheme1(inst.op, y_rot, prior, profiles, cfg, truth_rot);
  REQUIRE(t1.mse_by_iter.size() == t2.mse_by_iter.size());
  for (std::size_t k = 0; k < t1.mse_by_iter.size(); ++k)
    CHECK(std::abs(t1.mse_by_iter[k] - t2.mse_by_iter[k]) < 1e-10);

  const double alpha = 1.1;
  const auto st_profiles = se_camp_run(inst.op, prior, alpha, cfg.t_max);
  const Trajectory s1 = run_scheme3(inst.op, inst.meas.y, alpha, st_profiles,
                                    cfg, inst.truth);
  const Trajectory s2 =
      run_scheme3(inst.op, y_rot, alpha, st_profiles, cfg, truth_rot);
  REQUIRE(s1.mse_by_iter.size() == s2.mse_by_iter.size());
  for (std::size_t k = 0; k < s1.mse_by_iter.size(); ++k)
    CHECK(std::abs(s1.mse_by_iter[k] - s2.mse_by_iter[k]) < 1e-10);
}

TEST_CASE("amp mse convention calibration") {
  // One iteration from the prior-mean start: the empirical MSE of xhat^2 must
  // match the full-complex SE prediction (a half-convention mismatch would
  // show up as a factor-2 offset).
  const EnsembleParams params(2000, 20, 3, 320, 0.5, 0.15, 0.001);
  const BgPrior prior(0.1);
  double ratio_sum = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    Instance inst = make_instance(params, prior, 977 + rep);
    const auto profiles = se_sc_run(inst.op, params.sigma, prior, 1);
    AmpState state = AmpState::initial(params.n, inst.op.rows());
    REQUIRE(sc_amp_step(state, inst.op, inst.meas.y, prior,
                        profile_at(profiles, 0)));
    const double mse_amp = mse_empirical(state.xhat, inst.truth);
    const double mse_pred = mse_se_prediction(profile_at(profiles, 0), inst.op,
                                              prior);
    ratio_sum += mse_amp / mse_pred;
  }
  const double ratio = ratio_sum / reps;
  INFO("MSE_AMP / MSE_SE after one iteration = " << ratio);
  CHECK(ratio > 0.85);
  CHECK(ratio < 1.15);
}

TEST_CASE("scheme I desk-scale run reaches the noise floor") {
  const EnsembleParams params(500, 12, 3, 80, 0.5, 0.25, 0.001);
  const BgPrior prior(0.1);
  Instance inst = make_instance(params, prior, 21);
  AmpConfig cfg;
  cfg.t_max = 4 * inst.op.rows();
  const auto profiles = se_sc_run(inst.op, params.sigma, prior, cfg.t_max);
  const Trajectory traj =
      run_scheme1(inst.op, inst.meas.y, prior, profiles, cfg, inst.truth);
  CHECK(traj.status != AmpStatus::diverged);
  CHECK(traj.final_mse < 100 * params.sigma * params.sigma);
}

TEST_CASE("degenerate sparsity recovers the zero signal immediately") {
  const EnsembleParams params(120, 2, 2, 16, 0.5, 0.3, 0.0);
  const BgPrior prior(1e-9);
  Rng rng(31);
  const SensingOperator op = build_spatially_coupled(params, rng);
  const std::vector<cplx> truth(120, cplx(0, 0));  // almost-sure draw
  Rng rng2(32);
  const Measurements meas = op.measure(truth, rng2);
  AmpConfig cfg;
  cfg.t_max = 5;
  const auto profiles = se_sc_run(op, 0.0, prior, cfg.t_max);
  const Trajectory traj = run_scheme1(op, meas.y, prior, profiles, cfg, truth);
  CHECK(traj.mse_by_iter[0] == 0.0);
  CHECK(traj.final_mse < 1e-20);
}

TEST_CASE("divergence guard aborts on inconsistent inputs") {
  const EnsembleParams params(150, 3, 2, 16, 0.5, 0.3, 0.0);
  const BgPrior prior(0.2);
  Instance inst = make_instance(params, prior, 41);
  // measurements scaled out of all proportion to the model
  std::vector<cplx> y_bad = inst.meas.y;
  for (auto& v : y_bad) v *= 1e8;
  AmpConfig cfg;
  cfg.t_max = 50;
  const auto profiles = se_sc_run(inst.op, 0.0, prior, cfg.t_max);
  const Trajectory traj =
      run_scheme1(inst.op, y_bad, prior, profiles, cfg, inst.truth);
  CHECK(traj.status == AmpStatus::diverged);
}

TEST_CASE("scheme II with complete measurements recovers in one step") {
  Rng rng(51);
  const BgPrior prior(0.2);
  const SensingOperator op = build_random_fourier(256, 256, rng, 0.0);
  const std::vector<cplx> truth = sample_signal(256, prior, rng);
  const Measurements meas = op.measure(truth, rng);
  AmpConfig cfg;
  cfg.t_max = 3;
  const std::vector<double> phis{1e-12};  // complete data: no effective noise
  const Trajectory traj = run_scheme2(op, meas.y, prior, phis, cfg, truth);
  CHECK(traj.mse_by_iter[1] < 1e-12);
}

TEST_CASE("scheme II linear-denoiser run matches scalar SE within error bars") {
  // eps = 1 makes the iteration linear; the MSE trajectory must track
  // delta * phi_{t-1} (the SE prediction for xhat^t) within 3 standard errors.
  const int n = 2000;
  const double delta = 0.5;
  const int m = static_cast<int>(n * delta);
  const BgPrior prior(1.0);
  const int t_check = 8;
  const IidSeResult se = se_iid_run(delta, 0.0, prior, 200);
  const int instances = 30;
  std::vector<std::vector<double>> mses(instances);
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(seed_plan(404, "linear-se", inst));
    const SensingOperator op = build_random_fourier(n, m, rng, 0.0);
    const std::vector<cplx> truth = sample_signal(n, prior, rng);
    const Measurements meas = op.measure(truth, rng);
    AmpConfig cfg;
    cfg.t_max = t_check;
    const Trajectory traj = run_scheme2(op, meas.y, prior, se.phi, cfg, truth);
    mses[inst] = traj.mse_by_iter;
  }
  for (int t = 1; t <= t_check; ++t) {
    double sum = 0, sum_sq = 0;
    for (int inst = 0; inst < instances; ++inst) {
      const double v = mses[inst][t - 1];
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / instances;
    const double sd = std::sqrt(
        std::max(0.0, (sum_sq - instances * mean * mean) / (instances - 1.0)));
    const double stderr_v = sd / std::sqrt(double(instances));
    const double pred = delta * se.phi[t - 1];
    INFO("t=" << t << " mean=" << mean << " pred=" << pred
              << " stderr=" << stderr_v);
    CHECK(std::abs(mean - pred) <= 3.0 * stderr_v + 1e-12);
  }
}

TEST_CASE("scheme II succeeds above and fails below the threshold") {
  const BgPrior prior(0.2);
  const double delta_tilde = renyi_threshold(0.2).delta_tilde;
  const int n = 1000;
  auto run_at = [&](double delta, std::uint64_t seed) {
    Rng rng(seed);
    const int m = static_cast<int>(n * delta);
    const SensingOperator op = build_random_fourier(n, m, rng, 0.0);
    const std::vector<cplx> truth = sample_signal(n, prior, rng);
    const Measurements meas = op.measure(truth, rng);
    AmpConfig cfg;
    cfg.t_max = 4 * m;
    const IidSeResult se = se_iid_run(delta, 0.0, prior, cfg.t_max);
    return run_scheme2(op, meas.y, prior, se.phi, cfg, truth).final_mse;
  };
  CHECK(run_at(std::min(0.95, delta_tilde + 0.07), 61) < 1e-5);
  CHECK(run_at(std::max(0.05, delta_tilde - 0.07), 62) > 1e-3);
}

TEST_CASE("scheme III pins the estimate at zero for huge alpha") {
  const EnsembleParams params(150, 3, 2, 16, 0.5, 0.3, 0.0);
  const BgPrior prior(0.2);
  Instance inst = make_instance(params, prior, 71);
  AmpConfig cfg;
  cfg.t_max = 10;
  const double alpha = 100.0;
  const auto profiles = se_camp_run(inst.op, prior, alpha, cfg.t_max);
  const Trajectory traj =
      run_scheme3(inst.op, inst.meas.y, alpha, profiles, cfg, inst.truth);
  // the estimate never leaves zero
  CHECK(traj.final_mse == Approx(traj.mse_by_iter[0]));
}

TEST_CASE("single-step wrappers validate dimensions") {
  const EnsembleParams params(100, 2, 2, 8, 0.5, 0.3, 0.0);
  const BgPrior prior(0.2);
  Instance inst = make_instance(params, prior, 81);
  AmpState state = AmpState::initial(100, inst.op.rows());
  SeProfile bad;
  bad.phi.assign(inst.op.rows() + 1, 0.1);
  CHECK_THROWS_AS(sc_amp_step(state, inst.op, inst.meas.y, prior, bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(camp_step(state, inst.op, inst.meas.y, 0.0, bad),
                  std::invalid_argument);
}
