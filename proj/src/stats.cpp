#include "splitree/stats.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace splitree::stats {

Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Summary s;
  s.n = x.size();
  if (s.n < 2) throw std::invalid_argument("summarize needs at least two values");
  s.mean = x.mean();
  const Eigen::ArrayXd centred = x.array() - s.mean;
  const double m2 = centred.square().mean();
  const double m4 = centred.square().square().mean();
  const double n = static_cast<double>(s.n);
  s.variance = m2 * n / (n - 1.0);
  s.se_mean = std::sqrt(s.variance / n);
  s.se_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return s;
}

Eigen::MatrixXd covariance(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
  return centred.transpose() * centred / static_cast<double>(samples.rows() - 1);
}

Eigen::MatrixXd covariance_se(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
  const auto d = samples.cols();
  const double n = static_cast<double>(samples.rows());
  Eigen::MatrixXd se(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::ArrayXd prod = centred.col(i).array() * centred.col(j).array();
      const double m = prod.mean();
      se(i, j) = std::sqrt((prod - m).square().mean() / n);
    }
  }
  return se;
}

Skewness skewness(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double n = static_cast<double>(x.size());
  if (n < 3) throw std::invalid_argument("skewness needs at least three values");
  const Eigen::ArrayXd c = x.array() - x.mean();
  const double m2 = c.square().mean();
  const double m3 = c.cube().mean();
  Skewness s;
  s.value = m3 / std::pow(m2, 1.5);
  s.se = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
  return s;
}

double kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::ArrayXd c = x.array() - x.mean();
  const double m2 = c.square().mean();
  return c.square().square().mean() / (m2 * m2);
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  return Eigen::numext::igammac(a, x);
}

TestResult chi_square(const std::vector<double>& observed, const std::vector<double>& probs,
                      double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square: observed and probs must have equal, non-zero size");
  }
  double total = 0.0;
  for (double o : observed) total += o;
  std::vector<double> obs, expect;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += probs[i] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      expect.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (expect.empty()) {
      obs.push_back(o_acc);
      expect.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      expect.back() += e_acc;
    }
  }
  TestResult r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    r.statistic += (obs[i] - expect[i]) * (obs[i] - expect[i]) / expect[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  r.p_value = r.dof > 0 ? gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
  return r;
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi-transformed series, fast for small x.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * x * x));
    double sum = 0.0;
    for (int k = 1; k <= 9; k += 2) sum += std::pow(y, k * k);
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("ks_one_sample needs data");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  TestResult r;
  r.statistic = d;
  const double sq = std::sqrt(n);
  r.p_value = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

TestResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample needs data");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  TestResult r;
  r.statistic = d;
  const double ne = std::sqrt(n * m / (n + m));
  r.p_value = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt((x.array() - x.mean()).square().sum() / (n - 1.0));
  return 1.06 * sd * std::pow(n, -0.2);
}

Eigen::VectorXd kde(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  const double norm = 1.0 / (x.size() * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    out(g) = norm * ((x.array() - grid(g)) / bandwidth).square().unaryExpr([](double u) {
                      return std::exp(-0.5 * u);
                    }).sum();
  }
  return out;
}

double trapezoid(const Eigen::Ref<const Eigen::VectorXd>& grid,
                 const Eigen::Ref<const Eigen::VectorXd>& values) {
  double total = 0.0;
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    total += 0.5 * (grid(i) - grid(i - 1)) * (values(i) + values(i - 1));
  }
  return total;
}

double l2_distance(const Eigen::Ref<const Eigen::VectorXd>& grid,
                   const Eigen::Ref<const Eigen::VectorXd>& f,
                   const Eigen::Ref<const Eigen::VectorXd>& g) {
  return std::sqrt(trapezoid(grid, (f - g).array().square().matrix()));
}

}  // namespace splitree::stats
