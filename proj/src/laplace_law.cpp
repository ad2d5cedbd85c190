#include "splitree/laplace_law.hpp"

#include "splitree/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace splitree {

LaplaceLaw::LaplaceLaw(const Eigen::MatrixXd& covariance, double tolerance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw std::invalid_argument("Laplace covariance must be square and non-empty");
  }
  covariance_ = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_);
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest < -tolerance) {
    throw HypothesisError("covariance is not positive semidefinite (eigenvalue " +
                          std::to_string(smallest) + ")");
  }
  root_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd LaplaceLaw::sample(Rng& rng) const {
  Eigen::VectorXd z(dimension());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return std::sqrt(rng.exponential(1.0)) * (root_ * z);
}

double LaplaceLaw::characteristic(const Eigen::VectorXd& lambda) const {
  return 1.0 / (1.0 + 0.5 * lambda.dot(covariance_ * lambda));
}

double LaplaceLaw::density(double x, double variance) {
  const double sigma = std::sqrt(variance);
  return std::exp(-std::numbers::sqrt2 * std::abs(x) / sigma) / (std::numbers::sqrt2 * sigma);
}

double LaplaceLaw::cdf(double x, double variance) {
  const double sigma = std::sqrt(variance);
  const double half_tail = 0.5 * std::exp(-std::numbers::sqrt2 * std::abs(x) / sigma);
  return x < 0.0 ? half_tail : 1.0 - half_tail;
}

}  // namespace splitree
