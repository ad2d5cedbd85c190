#include "splitree/errors.hpp"
#include "splitree/laplace_law.hpp"
#include "splitree/mc_harness.hpp"
#include "splitree/quadrature.hpp"
#include "splitree/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace splitree;

TEST_CASE("quadrature") {
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 40.0).value == doctest::Approx(1.0).epsilon(1e-12));
  const auto rule = composite_gauss_legendre(0.0, 2.0, 4, 8);
  CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rule.nodes.array().pow(7).matrix().dot(rule.weights) == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("Laplace density and cdf") {
  for (double v : {0.5, 2.0}) {
    CHECK(integrate([v](double x) { return LaplaceLaw::density(x, v); }, -60.0, 60.0).value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(LaplaceLaw::cdf(0.0, v) == doctest::Approx(0.5));
    CHECK(LaplaceLaw::cdf(1.3, v) == doctest::Approx(integrate([v](double x) { return LaplaceLaw::density(x, v); }, -60.0, 1.3).value).epsilon(1e-9));
  }
}

TEST_CASE("Laplace sampler moments") {
  Eigen::MatrixXd cov(1, 1);
  cov << 2.0;
  const LaplaceLaw law(cov);
  Rng rng(1);
  Eigen::VectorXd x(100000);
  for (auto& v : x) v = law.sample(rng)(0);
  const auto s = stats::summarize(x);
  CHECK(std::abs(s.variance - 2.0) < 3.0 * s.se_variance);
  // kurtosis SE from a large pilot: sd of the excess-kurtosis estimate is roughly sqrt(var/n).
  const double kurt = stats::kurtosis(x);
  CHECK(std::abs(kurt - 6.0) < 5.0 * 0.12);
}

TEST_CASE("Laplace characteristic function") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.5;
  const LaplaceLaw law(cov);
  Rng rng(2);
  const int n = 50000;
  Eigen::MatrixXd draws(n, 2);
  for (int i = 0; i < n; ++i) draws.row(i) = law.sample(rng).transpose();
  CHECK((stats::covariance(draws) - cov).cwiseAbs().maxCoeff() < 0.05);
  for (const auto& lam : {Eigen::Vector2d(0.3, 0.0), Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(-0.5, 2.0),
                          Eigen::Vector2d(2.0, -1.0), Eigen::Vector2d(0.1, 0.1)}) {
    Eigen::VectorXd c = (draws * lam).array().cos();
    const auto s = stats::summarize(c);
    CHECK(std::abs(s.mean - law.characteristic(lam)) < 3.0 * s.se_mean);
    CHECK(law.characteristic(lam) == doctest::Approx(1.0 / (1.0 + 0.5 * lam.dot(cov * lam))));
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(LaplaceLaw{bad}, HypothesisError);
}

TEST_CASE("summary statistics") {
  Eigen::VectorXd x(5);
  x << 1, 2, 3, 4, 10;
  const auto s = stats::summarize(x);
  CHECK(s.mean == doctest::Approx(4.0));
  CHECK(s.variance == doctest::Approx(12.5));
  CHECK(stats::skewness(x).value > 0.0);
  Rng rng(3);
  Eigen::VectorXd g(20000);
  for (auto& v : g) v = rng.normal();
  const auto sk = stats::skewness(g);
  CHECK(std::abs(sk.value) < 3.0 * sk.se);
}

TEST_CASE("chi-square and KS") {
  CHECK(stats::gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)));
  const auto perfect = stats::chi_square({25, 25, 50}, {0.25, 0.25, 0.5});
  CHECK(perfect.statistic == doctest::Approx(0.0));
  CHECK(perfect.p_value == doctest::Approx(1.0));
  CHECK(stats::chi_square({90, 10}, {0.5, 0.5}).p_value < 1e-6);
  CHECK(stats::kolmogorov_sf(0.0) == doctest::Approx(1.0));
  CHECK(stats::kolmogorov_sf(1.36) == doctest::Approx(0.05).epsilon(0.02));
}

TEST_CASE("density diagnostics self-test") {
  Rng rng(4);
  Eigen::MatrixXd cov(1, 1);
  cov << 0.7;
  const LaplaceLaw law(cov);
  Eigen::VectorXd x(100000);
  for (auto& v : x) v = law.sample(rng)(0);
  const auto d = density_diagnostics(x, 0.7);
  CHECK(d.ks < 0.005);
  CHECK(stats::trapezoid(d.grid, d.kde) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(stats::l2_distance(d.grid, d.kde, d.kde) == 0.0);
  CHECK(d.l2 < 0.05);
}

TEST_CASE("parallel_for propagates exceptions and covers every index") {
  std::vector<int> hit(1000, 0);
  parallel_for(1000, 3, [&](std::int64_t i) { hit[i] += 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 1000);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::int64_t i) { if (i == 7) throw NumericError("x"); }), NumericError);
}
