#include "splitree/lifetimes.hpp"
#include "splitree/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace splitree;

TEST_CASE("survival at the boundaries") {
  CHECK(LifetimeModel::exponential(0.5).survival(0.0) == doctest::Approx(1.0));
  CHECK(LifetimeModel::infinite().survival(100.0) == 1.0);
  CHECK(LifetimeModel::exponential(0.5).survival(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("Laplace transform closed forms") {
  CHECK(LifetimeModel::exponential(0.5).laplace_transform(0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(LifetimeModel::infinite().laplace_transform(2.0) == 0.0);
  for (const auto& m : {LifetimeModel::exponential(0.5), LifetimeModel::rice(1.0, 1.0)}) {
    CHECK(m.laplace_transform(0.0) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Rice Laplace transform agrees between real and complex paths and quadrature") {
  const auto rice = LifetimeModel::rice(1.0, 1.0);
  for (double x : {0.1, 0.5, 1.0, 3.0}) {
    const double quad = rice.expect([x](double v) { return std::exp(-x * v); }).value;
    CHECK(rice.laplace_transform(x) == doctest::Approx(quad).epsilon(1e-9));
    CHECK(rice.laplace_transform(std::complex<double>(x, 0.0)).real() == doctest::Approx(quad).epsilon(1e-8));
    CHECK(rice.one_minus_laplace(x) == doctest::Approx(1.0 - quad).epsilon(1e-9));
  }
}

TEST_CASE("monotone and bounded survival and transform") {
  for (const auto& m : {LifetimeModel::exponential(0.5), LifetimeModel::rice(1.0, 1.0)}) {
    double last_s = 1.0 + 1e-12, last_l = 1.0 + 1e-12;
    for (double x = 0.0; x < 8.0; x += 0.05) {
      const double s = m.survival(x), l = m.laplace_transform(x);
      CHECK(s <= last_s);
      CHECK(l <= last_l);
      CHECK(s >= 0.0);
      CHECK(l >= 0.0);
      last_s = s;
      last_l = l;
    }
  }
}

TEST_CASE("means") {
  CHECK(LifetimeModel::exponential(0.5).mean() == doctest::Approx(2.0));
  CHECK(std::isinf(LifetimeModel::infinite().mean()));
  const auto rice = LifetimeModel::rice(1.0, 1.0);
  Rng rng(11);
  Eigen::VectorXd draws(100000);
  for (auto& d : draws) d = rice.sample(rng);
  const auto s = stats::summarize(draws);
  CHECK(std::abs(s.mean - rice.mean()) < 3.0 * s.se_mean);
}

TEST_CASE("sampling") {
  Rng rng(3);
  CHECK(std::isinf(LifetimeModel::infinite().sample(rng)));
  const auto expo = LifetimeModel::exponential(0.5);
  Eigen::VectorXd draws(100000);
  for (auto& d : draws) d = expo.sample(rng);
  const auto s = stats::summarize(draws);
  CHECK(std::abs(s.mean - 2.0) < 3.0 * s.se_mean);

  const auto rice = LifetimeModel::rice(1.0, 1.0);
  std::vector<double> r(100000);
  for (auto& d : r) d = rice.sample(rng);
  const auto ks = stats::ks_one_sample(r, [&](double v) { return 1.0 - rice.survival(v); });
  CHECK(ks.statistic < 0.01);
}

TEST_CASE("Rice survival at t = 1 matches sampling") {
  const auto rice = LifetimeModel::rice(1.0, 1.0);
  Rng rng(5);
  const int n = 1000000;
  int above = 0;
  for (int i = 0; i < n; ++i) above += rice.sample(rng) > 1.0;
  const double p = rice.survival(1.0);
  CHECK(std::abs(above / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("density integrates to one") {
  const auto rice = LifetimeModel::rice(1.0, 1.0);
  CHECK(rice.expect([](double) { return 1.0; }).value == doctest::Approx(1.0).epsilon(1e-9));
  const auto numeric = LifetimeModel::numeric({0.0, 1.0, 2.0, 3.0}, {0.0, 0.5, 0.5, 0.0});
  CHECK(numeric.expect([](double) { return 1.0; }).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(numeric.mean() == doctest::Approx(1.5).epsilon(1e-9));
}
