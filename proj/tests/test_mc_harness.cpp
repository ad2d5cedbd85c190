#include "splitree/mc_harness.hpp"
#include "splitree/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace splitree;

namespace {

const Model& rice() {
  static const Model m = [] {
    ModelParams p;
    p.birth_rate = 1.0;
    p.theta = 1.0;
    p.lifetime = LifetimeModel::rice(1.0, 1.0);
    return prepare_model(p);
  }();
  return m;
}

const SpectrumConstants& constants() {
  static const SpectrumConstants c = compute_constants(rice(), 20);
  return c;
}

ExperimentConfig small(double t) {
  ExperimentConfig e;
  e.t = t;
  e.k_list = {1, 2};
  e.replicates = 2000;
  e.seed = 42;
  return e;
}

}  // namespace

TEST_CASE("joint moment estimates are self-consistent") {
  MonteCarloJointMoments joint(rice(), constants(), 3, 4000, 9);
  const JointMomentEstimate est = joint.estimate(4.0);
  CHECK(est.replicates == 4000);
  CHECK((est.a_z0.array() >= 0.0).all());
  CHECK((est.n_z0.array() >= 0.0).all());
  // sum over l >= 1 plus the l = 0 remainder is E A(k); only the l >= 1 part is tabulated, so it
  // must not exceed E A(k) beyond noise.
  for (int k = 0; k < 3; ++k) CHECK(est.a_z0.row(k).sum() <= est.mean_a(k) + 3.0 * est.mean_a_se(k));
  double weighted = 0.0;
  for (int k = 0; k < 3; ++k) weighted += (k + 1) * est.n_z0(k);
  CHECK(weighted <= est.mean_n2 + 3.0 * est.mean_n2_se);
  CHECK(std::abs(est.mean_a(0) - mean_spectrum(rice(), constants(), 1, 4.0)) < 3.0 * est.mean_a_se(0));
  // memoized
  const auto again = joint.estimate(4.0);
  CHECK(again.a_z0 == est.a_z0);
  CHECK(joint.simulations() == 4000);
}

TEST_CASE("error statistic is centred and reproducible") {
  const ExperimentConfig e = small(6.0);
  const StatisticSamples s = run_error_clt(rice(), constants(), e);
  CHECK(s.values.rows() == 2000);
  CHECK(s.values.cols() == 2);
  CHECK_FALSE(s.exploratory);
  for (int j = 0; j < 2; ++j) {
    const auto sum = stats::summarize(s.values.col(j));
    CHECK(std::abs(sum.mean) < 3.0 * sum.se_mean);
  }
  const StatisticSamples again = run_error_clt(rice(), constants(), e);
  CHECK(again.values == s.values);
  ExperimentConfig parallel = e;
  parallel.threads = 3;
  CHECK(run_error_clt(rice(), constants(), parallel).values == s.values);
}

TEST_CASE("clonal-supercritical runs are flagged exploratory") {
  const Model low = prepare_model(rice().params.with_theta(0.2));
  const SpectrumConstants c = compute_constants(low, 20);
  ExperimentConfig e = small(6.0);
  e.replicates = 300;
  const StatisticSamples s = run_error_clt(low, c, e);
  CHECK(s.exploratory);
}

TEST_CASE("limit statistic on the Yule tree") {
  ModelParams p;
  p.birth_rate = 1.0;
  p.theta = 2.0;
  p.lifetime = LifetimeModel::infinite();
  const Model m = prepare_model(p, {20.0, 0.005});
  const SpectrumConstants c = compute_constants(m, 20);
  ExperimentConfig e;
  e.t = 4.0;
  e.T = 8.0;
  e.k_list = {1};
  e.replicates = 2000;
  const StatisticSamples s = run_limit_clt(m, c, e);
  CHECK(s.kind == StatisticKind::limit);
  const auto sum = stats::summarize(s.values.col(0));
  CHECK(std::abs(sum.mean) < 3.0 * sum.se_mean);
  const auto es = stats::summarize(s.e_hat);
  CHECK(std::abs(es.mean - 1.0) < 3.0 * es.se_mean);
}

TEST_CASE("EHH study structure") {
  ExperimentConfig e;
  e.t = 6.0;
  e.replicates = 100;
  e.theta_grid = {0.0, 0.3, 0.8, 1.2, 2.0};
  const EhhStudy study = run_ehh(rice(), e);
  REQUIRE(study.rows.size() == 4);  // 0.3 < alpha is skipped
  CHECK(study.warnings.size() == 1);
  CHECK(study.rows[0].theta == 0.0);
  CHECK(study.rows[0].exact_mean == 1.0);
  CHECK(std::isnan(study.rows[0].approx));
  for (Eigen::Index r = 0; r < study.exact.rows(); ++r)
    for (Eigen::Index j = 1; j < study.exact.cols(); ++j) CHECK(study.exact(r, j) <= study.exact(r, j - 1) + 1e-15);
}
