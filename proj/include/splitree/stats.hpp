#ifndef SPLITREE_STATS_HPP
#define SPLITREE_STATS_HPP

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace splitree::stats {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se_mean = 0.0;
  double se_variance = 0.0;  // from the fourth central moment
  Eigen::Index n = 0;
};

Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Unbiased covariance of the columns of `samples` (rows are replicates).
Eigen::MatrixXd covariance(const Eigen::Ref<const Eigen::MatrixXd>& samples);

/// Standard errors of the covariance entries, from per-replicate products.
Eigen::MatrixXd covariance_se(const Eigen::Ref<const Eigen::MatrixXd>& samples);

struct Skewness {
  double value = 0.0;
  double se = 0.0;  // sqrt(6n(n-1)/((n-2)(n+1)(n+3)))
};

Skewness skewness(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Excess-free kurtosis m4 / m2^2 (6 for the Laplace law, 3 for the Gaussian).
double kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x);

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
  int dof = 0;
};

/// Chi-square goodness of fit of counts over categories with probabilities `probs`
/// (the last category should carry the tail). Categories are merged left to right
/// until each expected count reaches `min_expected`.
TestResult chi_square(const std::vector<double>& observed, const std::vector<double>& probs,
                      double min_expected = 5.0);

/// Asymptotic Kolmogorov distribution survival function P(K > x).
double kolmogorov_sf(double x);

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> x, std::vector<double> y);

/// Silverman's rule 1.06 sd n^{-1/5}.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Gaussian-kernel density estimate evaluated on `grid`.
Eigen::VectorXd kde(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& grid, double bandwidth);

double trapezoid(const Eigen::Ref<const Eigen::VectorXd>& grid,
                 const Eigen::Ref<const Eigen::VectorXd>& values);

/// sqrt(int (f - g)^2) on the grid by the trapezoid rule.
double l2_distance(const Eigen::Ref<const Eigen::VectorXd>& grid,
                   const Eigen::Ref<const Eigen::VectorXd>& f,
                   const Eigen::Ref<const Eigen::VectorXd>& g);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace splitree::stats

#endif  // SPLITREE_STATS_HPP
