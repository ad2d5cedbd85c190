#include "splitree/forward.hpp"
#include "splitree/mc_harness.hpp"
#include "splitree/spectrum.hpp"
#include "splitree/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace splitree;

namespace {

ModelParams make(LifetimeModel lifetime, double theta) {
  ModelParams p;
  p.birth_rate = 1.0;
  p.theta = theta;
  p.lifetime = std::move(lifetime);
  return p;
}

}  // namespace

TEST_CASE("extinct run gives a zero estimate") {
  ForwardRun run;
  run.horizon = 5.0;
  run.terminal_N = 0;
  CHECK(estimate_E(run, 0.5, 0.5) == 0.0);
}

TEST_CASE("checkpoints satisfy the partition identity and refinement") {
  const ModelParams p = make(LifetimeModel::rice(1.0, 1.0), 1.0);
  ForwardOptions o;
  o.horizon = 6.0;
  o.checkpoints = {2.0, 4.0, 6.0};
  o.theta_evals = {0.5, 1.0};
  o.theta_max = 1.0;
  Rng rng(1);
  for (int r = 0; r < 200; ++r) {
    const ForwardRun run = simulate_forward_surviving(p, o, rng);
    REQUIRE(run.checkpoints.size() == 3);
    for (const auto& cp : run.checkpoints) {
      REQUIRE(cp.spectra.size() == 2);
      for (const auto& s : cp.spectra) {
        CHECK(s.N == cp.N);
        CHECK(partition_holds(s));
      }
      CHECK(cp.spectra[1].clonal <= cp.spectra[0].clonal);
    }
  }
}

TEST_CASE("unconditioned mean population matches W - W*P_V (Rice, t = 5)") {
  const Model m = prepare_model(make(LifetimeModel::rice(1.0, 1.0), 0.0));
  ForwardOptions o;
  o.horizon = 5.0;
  o.checkpoints = {5.0};
  Rng rng(2);
  Eigen::VectorXd n(10000);
  for (auto& x : n) x = static_cast<double>(simulate_forward(m.params, o, rng).checkpoints.front().N);
  const auto s = stats::summarize(n);
  const auto pm = population_moments(m.params, m.W, 5.0);
  CHECK(std::abs(s.mean - pm.expected_N) < 3.0 * s.se_mean);
}

TEST_CASE("survival fraction approaches alpha / b") {
  for (const auto& lifetime : {LifetimeModel::exponential(0.5), LifetimeModel::rice(1.0, 1.0)}) {
    const ModelParams p = make(lifetime, 0.0);
    const double alpha = malthusian_alpha(p);
    ForwardOptions o;
    o.horizon = 200.0;
    o.alive_cap = 300;
    Rng rng(3);
    const int reps = 10000;
    int survived = 0;
    for (int r = 0; r < reps; ++r) {
      const ForwardRun run = simulate_forward(p, o, rng);
      survived += run.reached_alive_cap || run.terminal_N > 0;
    }
    const double frac = survived / double(reps);
    CHECK(std::abs(frac - alpha) < 3.0 * std::sqrt(alpha * (1 - alpha) / reps));
  }
}

TEST_CASE("conditioned forward population agrees with CPP (exponential, t = 4)") {
  const Model m = prepare_model(make(LifetimeModel::exponential(0.5), 0.0), {20.0, 0.01});
  ForwardOptions o;
  o.horizon = 4.0;
  o.checkpoints = {4.0};
  o.markov_continuation = false;
  Rng rng(4);
  std::vector<double> fwd, cpp;
  for (int r = 0; r < 5000; ++r) {
    fwd.push_back(static_cast<double>(simulate_forward_surviving(m.params, o, rng).checkpoints.front().N));
    cpp.push_back(static_cast<double>(sample_cpp(m.W, 4.0, rng).size()));
  }
  CHECK(stats::ks_two_sample(fwd, cpp).p_value > 0.01);
}

TEST_CASE("Markov continuation preserves the law of N_T") {
  const Model m = prepare_model(make(LifetimeModel::exponential(0.5), 0.0), {20.0, 0.01});
  ForwardOptions jump;
  jump.horizon = 6.0;
  jump.checkpoints = {3.0};
  ForwardOptions direct = jump;
  direct.markov_continuation = false;
  Rng rng(5);
  std::vector<double> a, b;
  for (int r = 0; r < 5000; ++r) {
    a.push_back(static_cast<double>(simulate_forward(m.params, jump, rng).terminal_N));
    b.push_back(static_cast<double>(simulate_forward(m.params, direct, rng).terminal_N));
  }
  CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("martingale limit estimate is standard exponential on survival") {
  const Model m = prepare_model(make(LifetimeModel::exponential(0.5), 0.0), {20.0, 0.01});
  ForwardOptions o;
  o.horizon = 20.0 / m.alpha;
  o.checkpoints = {4.0};
  Rng rng(6);
  std::vector<double> e;
  while (e.size() < 10000) {
    const ForwardRun run = simulate_forward(m.params, o, rng);
    if (run.terminal_N > 0) e.push_back(estimate_E(run, m.alpha, m.psi_prime_alpha));
  }
  const auto s = stats::summarize(Eigen::Map<Eigen::VectorXd>(e.data(), e.size()));
  CHECK(std::abs(s.mean - 1.0) < 3.0 * s.se_mean);
  CHECK(stats::ks_one_sample(e, [](double x) { return x > 0 ? 1.0 - std::exp(-x) : 0.0; }).statistic < 0.03);
}

TEST_CASE("martingale limit estimate for Rice lifetimes") {
  const Model m = prepare_model(make(LifetimeModel::rice(1.0, 1.0), 0.0));
  ForwardOptions o;
  o.horizon = 14.0;
  o.checkpoints = {14.0};
  Rng rng(7);
  std::vector<double> e;
  while (e.size() < 4000) {
    const ForwardRun run = simulate_forward(m.params, o, rng);
    REQUIRE_FALSE(run.truncated);
    if (run.terminal_N > 0) e.push_back(estimate_E(run, m.alpha, m.psi_prime_alpha));
  }
  const auto s = stats::summarize(Eigen::Map<Eigen::VectorXd>(e.data(), e.size()));
  CHECK(std::abs(s.mean - 1.0) < 3.0 * s.se_mean);
  CHECK(stats::ks_one_sample(e, [](double x) { return x > 0 ? 1.0 - std::exp(-x) : 0.0; }).statistic < 0.03);
}
