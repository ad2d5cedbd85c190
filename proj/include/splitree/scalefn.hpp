#ifndef SPLITREE_SCALEFN_HPP
#define SPLITREE_SCALEFN_HPP

#include "splitree/lifetimes.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <type_traits>
#include <vector>

namespace splitree {

/// Splitting-tree parameters: birth rate b, mutation rate theta, lifespan law.
struct ModelParams {
  double birth_rate = 1.0;
  double theta = 0.0;
  LifetimeModel lifetime = LifetimeModel::infinite();

  bool supercritical() const { return birth_rate * lifetime.mean() > 1.0; }
  /// Throws HypothesisError unless b E[V] > 1 and the rates are admissible.
  void validate() const;
  ModelParams with_theta(double value) const {
    ModelParams copy = *this;
    copy.theta = value;
    return copy;
  }
};

enum class ExponentKind { plain, clonal };

/// psi(x) = x - b (1 - E e^{-xV}); real or complex argument.
template <typename Scalar>
Scalar psi(const ModelParams& params, const Scalar& x) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return x - params.birth_rate * params.lifetime.one_minus_laplace(x);
  } else {
    return x - params.birth_rate * (Scalar(1.0) - params.lifetime.laplace_transform(x));
  }
}

/// Exponent of the clonal tree: psi_theta(x) = x psi(x + theta) / (x + theta).
template <typename Scalar>
Scalar psi_theta(const ModelParams& params, const Scalar& x) {
  if (params.theta == 0.0) return psi(params, x);
  if (x == Scalar(0.0)) return Scalar(0.0);
  const Scalar shifted = x + params.theta;
  return x * psi(params, shifted) / shifted;
}

struct LaplaceExponent {
  ModelParams params;
  ExponentKind kind = ExponentKind::plain;

  template <typename Scalar>
  Scalar operator()(const Scalar& x) const {
    return kind == ExponentKind::plain ? psi(params, x) : psi_theta(params, x);
  }
};

/// Largest root of psi. Throws HypothesisError for non-supercritical parameters.
double malthusian_alpha(const ModelParams& params);
/// psi'(alpha) = 1 - b E[V e^{-alpha V}].
double psi_prime_alpha(const ModelParams& params, double alpha);
/// mu = 1 / (b E[V] - 1), or 0 when E[V] is infinite.
double limit_constant_mu(const ModelParams& params);
/// theta / psi(theta): the limit of W_theta in the clonal subcritical regime.
double clonal_limit(const ModelParams& params, double alpha);

/// Exact scale functions of the exponential and infinite lifetime laws.
struct MarkovScale {
  double birth_rate;
  double death_rate;
  double alpha;
  double theta;
  ExponentKind kind;

  double value(double t) const;
  double slope(double t) const;
};

/// W or W_theta tabulated on a uniform grid [0, t_max], interpolated by
/// cubic Hermite segments and extrapolated with the long-time asymptotics.
class ScaleTable {
 public:
  ScaleTable() = default;
  ScaleTable(ExponentKind kind, double theta, double alpha, double psi_prime_alpha, double mu,
             double limit, Eigen::VectorXd grid, Eigen::VectorXd values, Eigen::VectorXd slopes,
             std::optional<MarkovScale> exact = std::nullopt);

  double operator()(double t) const;
  double derivative(double t) const;
  /// t with W(t) = y; nullopt when y lies beyond W(t_max). Requires y >= 1.
  std::optional<double> inverse(double y) const;

  ExponentKind kind() const { return kind_; }
  double theta() const { return theta_; }
  double alpha() const { return alpha_; }
  double psi_prime_alpha() const { return psi_prime_alpha_; }
  double mu() const { return mu_; }
  /// Long-time limit (clonal subcritical) or 0 when the table grows.
  double limit() const { return limit_; }
  double t_max() const { return grid_(grid_.size() - 1); }
  double step() const { return step_; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& slopes() const { return slopes_; }
  bool exact() const { return exact_.has_value(); }

  /// 1/psi'(alpha) - e^{-alpha t} W(t) (plain tables).
  double F(double t) const;
  /// e^{-alpha t} psi'(alpha) W(t) - 1 (plain tables).
  double asymptotic_residual(double t) const;

 private:
  double interpolate(double t, bool want_slope) const;
  double extrapolate(double t, bool want_slope) const;

  ExponentKind kind_ = ExponentKind::plain;
  double theta_ = 0.0;
  double alpha_ = 0.0;
  double psi_prime_alpha_ = 1.0;
  double mu_ = 0.0;
  double limit_ = 0.0;
  double step_ = 0.0;
  Eigen::VectorXd grid_;
  Eigen::VectorXd values_;
  Eigen::VectorXd slopes_;
  std::optional<MarkovScale> exact_;
};

struct InversionOptions {
  int euler_terms = 18;           // accuracy of order 10^{-0.6 M}
  int check_every = 16;           // nodes between convergence checks
  double check_tolerance = 1e-6;  // relative gap allowed between M and M - 4 terms
};

/// Euler (Abate-Whitt) inversion of a Laplace transform at time t > 0.
template <typename Transform>
double euler_invert(Transform&& transform, double t, int terms);

/// Tabulate W (plain) or W_theta (clonal) by inverting the shifted
/// transform lambda -> 1/exponent(lambda + s) and multiplying back e^{st}.
/// Throws NumericError naming the offending t when the inversion is unstable.
ScaleTable invert_scale(const LaplaceExponent& exponent, double alpha, double t_max, double step,
                        const InversionOptions& options = {});

/// Closed forms for the Markovian laws, numerical inversion otherwise.
ScaleTable build_scale_table(const ModelParams& params, ExponentKind kind, double alpha,
                             double t_max, double step);

/// t with W(t) = y, or nullopt past t_max. Throws std::domain_error for y < 1.
std::optional<double> inverse_W(const ScaleTable& table, double y);

struct PopulationMoments {
  double expected_N;     // E N_t = W - W*P_V
  double survival_prob;  // P(N_t > 0) = 1 - W*P_V / W
  double convolution;    // W*P_V(t)
};

PopulationMoments population_moments(const ModelParams& params, const ScaleTable& W, double t);

/// Parameters with their resolved constants and both scale tables.
struct Model {
  ModelParams params;
  double alpha = 0.0;
  double psi_prime_alpha = 1.0;
  double mu = 0.0;
  ScaleTable W;
  ScaleTable W_theta;
};

struct GridSpec {
  double t_max = 0.0;  // 0 selects 20 / alpha
  double step = 0.0;   // 0 selects t_max / 2000
};

Model prepare_model(const ModelParams& params, const GridSpec& grid = {});

// ---------------------------------------------------------------------------

template <typename Transform>
double euler_invert(Transform&& transform, double t, int terms) {
  // f(t) ~ 10^{M/3}/t * sum_{k=0}^{2M} eta_k Re F((M ln10/3 + i pi k)/t)
  const int m = terms;
  const double shift = m * std::log(10.0) / 3.0;
  std::vector<double> xi(2 * m + 1, 1.0);
  xi[0] = 0.5;
  xi[2 * m] = std::pow(2.0, -m);
  double binom = 1.0;
  for (int k = 1; k < m; ++k) {
    binom *= static_cast<double>(m - k + 1) / k;
    xi[2 * m - k] = xi[2 * m - k + 1] + std::pow(2.0, -m) * binom;
  }
  double sum = 0.0;
  for (int k = 0; k <= 2 * m; ++k) {
    const std::complex<double> beta(shift, std::numbers::pi * k);
    const double eta = (k % 2 == 0 ? 1.0 : -1.0) * xi[k];
    sum += eta * std::real(transform(beta / t));
  }
  return std::pow(10.0, m / 3.0) / t * sum;
}

}  // namespace splitree

#endif  // SPLITREE_SCALEFN_HPP
