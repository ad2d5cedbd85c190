#include "splitree/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace splitree {

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendreRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n == 1) {
    rule.nodes(0) = 0.0;
    rule.weights(0) = 2.0;
  }
  return rule;
}

GaussLegendreRule composite_gauss_legendre(double lo, double hi, int panels, int order) {
  const auto base = gauss_legendre(order);
  GaussLegendreRule rule{Eigen::VectorXd(panels * order), Eigen::VectorXd(panels * order)};
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double centre = lo + (p + 0.5) * width;
    rule.nodes.segment(p * order, order) =
        (centre + 0.5 * width * base.nodes.array()).matrix();
    rule.weights.segment(p * order, order) = 0.5 * width * base.weights;
  }
  return rule;
}

}  // namespace splitree
