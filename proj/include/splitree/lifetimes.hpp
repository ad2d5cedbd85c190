#ifndef SPLITREE_LIFETIMES_HPP
#define SPLITREE_LIFETIMES_HPP

#include "splitree/quadrature.hpp"
#include "splitree/rng.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace splitree {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

enum class LifetimeKind { exponential, infinite, rice, numeric };

std::string to_string(LifetimeKind kind);

/// Density stored as a piecewise cubic on a uniform grid; integrates
/// e^{-zv} times the density exactly cell by cell, for complex z.
class PiecewiseCubicDensity {
 public:
  PiecewiseCubicDensity() = default;
  /// Cubic Hermite from node values and derivatives.
  static PiecewiseCubicDensity hermite(double lo, double step, const Eigen::VectorXd& values,
                                       const Eigen::VectorXd& slopes);
  /// Linear interpolation between (value, density) nodes; nodes need not be uniform.
  static PiecewiseCubicDensity linear(const std::vector<double>& nodes,
                                      const std::vector<double>& density);

  std::complex<double> laplace(std::complex<double> z) const;
  double operator()(double v) const;
  double upper() const { return edges_.empty() ? 0.0 : edges_.back(); }

 private:
  std::vector<double> edges_;                  // cell boundaries, size cells + 1
  std::vector<std::array<double, 4>> coeffs_;  // p(u) = c0 + c1 u + c2 u^2 + c3 u^3, u = v - edge
};

/// Lifespan law P_V. Immutable; copies share the precomputed tables.
class LifetimeModel {
 public:
  struct Exponential {
    double rate;
  };
  struct Infinite {};
  struct Rice {
    double shape;  // nu, distance of the Gaussian mean from the origin
    double scale;  // sigma, per-axis standard deviation
  };
  struct Numeric {
    std::vector<double> values;
    std::vector<double> density;
  };

  static LifetimeModel exponential(double rate);
  static LifetimeModel infinite();
  static LifetimeModel rice(double shape, double scale);
  static LifetimeModel numeric(std::vector<double> values, std::vector<double> density);

  LifetimeKind kind() const;
  bool is_markovian() const {
    return kind() == LifetimeKind::exponential || kind() == LifetimeKind::infinite;
  }
  /// Death rate d of the Markovian laws (0 for Infinite).
  double death_rate() const;
  const Rice* rice_params() const { return std::get_if<Rice>(&law_); }

  /// P(V > t).
  double survival(double t) const;
  /// Density of V on (0, inf); zero everywhere for Infinite.
  double density(double v) const;
  /// E[exp(-lambda V)] with exp(-lambda * inf) = 0 for lambda > 0.
  double laplace_transform(double lambda) const;
  /// 1 - E[exp(-lambda V)] without cancellation at small lambda.
  double one_minus_laplace(double lambda) const;
  /// E[exp(-z V)] for Re z > 0.
  std::complex<double> laplace_transform(std::complex<double> z) const;
  /// E[V]; +inf for Infinite.
  double mean() const;
  /// A draw of V; kNever for Infinite.
  double sample(Rng& rng) const;
  /// Point beyond which the density is below 1e-14 (finite laws only).
  double support_upper() const { return upper_; }

  /// Integral of g(v) against the density over (0, min(hi, support_upper())).
  template <typename G>
  QuadratureResult expect(G&& g, const QuadratureOptions& opt = {},
                          double hi = std::numeric_limits<double>::infinity()) const {
    QuadratureResult total;
    if (kind() == LifetimeKind::infinite) return total;
    auto integrand = [&](double v) { return g(v) * density(v); };
    const double top = std::min(hi, upper_);
    if (kind() == LifetimeKind::numeric) {
      // Piecewise-linear density: integrate cell by cell to respect the kinks.
      const auto& nodes = std::get<Numeric>(law_).values;
      for (std::size_t i = 0; i + 1 < nodes.size() && nodes[i] < top; ++i) {
        auto r = integrate(integrand, nodes[i], std::min(nodes[i + 1], top), opt);
        total.value += r.value;
        total.error += r.error;
      }
      return total;
    }
    return integrate(integrand, 0.0, top, opt);
  }

 private:
  using Law = std::variant<Exponential, Infinite, Rice, Numeric>;
  explicit LifetimeModel(Law law);

  Law law_;
  double upper_ = 0.0;
  double mean_ = 0.0;
  std::shared_ptr<const PiecewiseCubicDensity> table_;
  std::shared_ptr<const std::vector<double>> numeric_cdf_;
};

}  // namespace splitree

#endif  // SPLITREE_LIFETIMES_HPP
