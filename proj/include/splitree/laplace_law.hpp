#ifndef SPLITREE_LAPLACE_LAW_HPP
#define SPLITREE_LAPLACE_LAW_HPP

#include "splitree/rng.hpp"

#include <Eigen/Dense>

namespace splitree {

/// Centered multivariate Laplace law L(0, K): sqrt(E) G with E ~ Exp(1)
/// and G ~ N(0, K) independent. Its characteristic function is 1/(1 + lambda'K lambda/2).
class LaplaceLaw {
 public:
  /// Rejects K with an eigenvalue below -tolerance; small negative ones are clipped.
  explicit LaplaceLaw(const Eigen::MatrixXd& covariance, double tolerance = 1e-10);

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  Eigen::Index dimension() const { return covariance_.rows(); }

  Eigen::VectorXd sample(Rng& rng) const;
  double characteristic(const Eigen::VectorXd& lambda) const;

  /// Univariate marginal with variance `variance`.
  static double density(double x, double variance);
  static double cdf(double x, double variance);

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd root_;  // root_ * root_' = covariance_ (clipped)
};

}  // namespace splitree

#endif  // SPLITREE_LAPLACE_LAW_HPP
