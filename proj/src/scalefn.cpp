#include "splitree/scalefn.hpp"

#include "splitree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace splitree {

namespace {

const QuadratureOptions kTight{1e-14, 1e-12, 8000};

std::string describe(double x) {
  std::ostringstream out;
  out.precision(10);
  out << x;
  return out.str();
}

}  // namespace

void ModelParams::validate() const {
  if (!(birth_rate > 0.0) || !std::isfinite(birth_rate)) {
    throw HypothesisError("birth rate must be finite and > 0");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw HypothesisError("mutation rate theta must be finite and >= 0");
  }
  if (!supercritical()) {
    throw HypothesisError("parameters are not supercritical: b E[V] = " +
                          describe(birth_rate * lifetime.mean()) + " <= 1");
  }
}

double malthusian_alpha(const ModelParams& params) {
  params.validate();
  const double b = params.birth_rate;
  if (params.lifetime.kind() == LifetimeKind::infinite) return b;
  auto f = [&](double x) { return psi(params, x); };

  // psi(b) = b E e^{-bV} >= 0 and psi < 0 just right of the origin.
  double hi = b;
  double lo = 0.5 * b;
  while (f(lo) >= 0.0) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-12) throw NumericError("malthusian_alpha: no sign change of psi found above 1e-12");
  }
  for (int iter = 0; iter < 200 && hi - lo > 4e-16 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  if (std::abs(f(alpha)) > 1e-12 * std::max(1.0, alpha)) {
    throw NumericError("malthusian_alpha: |psi(alpha)| = " + describe(std::abs(f(alpha))) +
                       " above tolerance");
  }
  const double identity_gap =
      std::abs(params.lifetime.laplace_transform(alpha) - (1.0 - alpha / b));
  if (identity_gap > 1e-8) {
    throw NumericError("malthusian_alpha: E e^{-alpha V} misses 1 - alpha/b by " +
                       describe(identity_gap));
  }
  return alpha;
}

double psi_prime_alpha(const ModelParams& params, double alpha) {
  switch (params.lifetime.kind()) {
    case LifetimeKind::infinite: return 1.0;
    case LifetimeKind::exponential: {
      const double d = params.lifetime.death_rate();
      return 1.0 - params.birth_rate * d / ((d + alpha) * (d + alpha));
    }
    default: {
      const double moment =
          params.lifetime.expect([alpha](double v) { return v * std::exp(-alpha * v); }, kTight).value;
      return 1.0 - params.birth_rate * moment;
    }
  }
}

double limit_constant_mu(const ModelParams& params) {
  const double mean = params.lifetime.mean();
  if (!std::isfinite(mean)) return 0.0;
  return 1.0 / (params.birth_rate * mean - 1.0);
}

double clonal_limit(const ModelParams& params, double alpha) {
  if (!(params.theta > alpha)) {
    throw HypothesisError("clonal limit needs theta > alpha (theta = " + describe(params.theta) +
                          ", alpha = " + describe(alpha) + ")");
  }
  return params.theta / psi(params, params.theta);
}

// ---------------------------------------------------------------------------

double MarkovScale::value(double t) const {
  if (kind == ExponentKind::plain || theta == 0.0) {
    return (birth_rate * std::exp(alpha * t) - death_rate) / alpha;
  }
  const double gap = theta - alpha;
  if (std::abs(gap) < 1e-12) return 1.0 + birth_rate * t;
  return ((theta + death_rate) - birth_rate * std::exp(-gap * t)) / gap;
}

double MarkovScale::slope(double t) const {
  const double rate = (kind == ExponentKind::plain) ? alpha : alpha - theta;
  return birth_rate * std::exp(rate * t);
}

ScaleTable::ScaleTable(ExponentKind kind, double theta, double alpha, double psi_prime_alpha,
                       double mu, double limit, Eigen::VectorXd grid, Eigen::VectorXd values,
                       Eigen::VectorXd slopes, std::optional<MarkovScale> exact)
    : kind_(kind),
      theta_(theta),
      alpha_(alpha),
      psi_prime_alpha_(psi_prime_alpha),
      mu_(mu),
      limit_(limit),
      grid_(std::move(grid)),
      values_(std::move(values)),
      slopes_(std::move(slopes)),
      exact_(exact) {
  if (grid_.size() < 2 || grid_.size() != values_.size() || grid_.size() != slopes_.size()) {
    throw std::invalid_argument("ScaleTable: grid, values and slopes must match (>= 2 nodes)");
  }
  step_ = grid_(1) - grid_(0);
}

double ScaleTable::interpolate(double t, bool want_slope) const {
  const Eigen::Index last = grid_.size() - 1;
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / step_), last - 1);
  const double h = step_;
  const double s = (t - grid_(j)) / h;
  const double y0 = values_(j), y1 = values_(j + 1);
  const double d0 = slopes_(j) * h, d1 = slopes_(j + 1) * h;
  if (want_slope) {
    const double s2 = s * s;
    return ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 +
            (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1) /
           h;
  }
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1;
}

double ScaleTable::extrapolate(double t, bool want_slope) const {
  const double end = t_max();
  const double w_end = values_(values_.size() - 1);
  const double dt = t - end;
  if (kind_ == ExponentKind::plain || theta_ == 0.0) {
    // W(t) = e^{alpha t}/psi'(alpha) - e^{alpha t} F(t), with e^{alpha t} F(t) frozen at t_max.
    const double offset = std::exp(alpha_ * end) / psi_prime_alpha_ - w_end;
    const double lead = std::exp(alpha_ * t) / psi_prime_alpha_;
    return want_slope ? alpha_ * lead : lead - offset;
  }
  if (theta_ > alpha_) {
    const double gap = theta_ - alpha_;
    const double decay = std::exp(-gap * dt);
    return want_slope ? (limit_ - w_end) * gap * decay : limit_ - (limit_ - w_end) * decay;
  }
  if (theta_ < alpha_) {
    const double growth = std::exp((alpha_ - theta_) * dt);
    return want_slope ? (alpha_ - theta_) * w_end * growth : w_end * growth;
  }
  const double slope_end = slopes_(slopes_.size() - 1);
  return want_slope ? slope_end : w_end + slope_end * dt;
}

double ScaleTable::operator()(double t) const {
  if (t <= 0.0) return 1.0;
  if (exact_) return exact_->value(t);
  if (t > t_max()) return extrapolate(t, false);
  return interpolate(t, false);
}

double ScaleTable::derivative(double t) const {
  if (exact_) return exact_->slope(std::max(t, 0.0));
  if (t > t_max()) return extrapolate(t, true);
  return interpolate(std::max(t, 0.0), true);
}

std::optional<double> ScaleTable::inverse(double y) const {
  if (!(y >= 1.0)) throw std::domain_error("inverse_W: y must be >= 1");
  const Eigen::Index last = values_.size() - 1;
  if (y > values_(last)) return std::nullopt;
  if (y == 1.0) return 0.0;
  if (exact_ && kind_ == ExponentKind::plain) {
    return std::log((exact_->alpha * y + exact_->death_rate) / exact_->birth_rate) / exact_->alpha;
  }
  const double* begin = values_.data();
  const double* found = std::upper_bound(begin, begin + values_.size(), y);
  const auto j = std::clamp<Eigen::Index>(found - begin - 1, 0, last - 1);
  double lo = grid_(j), hi = grid_(j + 1);
  double t = lo + (hi - lo) * (y - values_(j)) / std::max(values_(j + 1) - values_(j), 1e-300);
  for (int iter = 0; iter < 50; ++iter) {
    const double residual = (*this)(t) - y;
    if (std::abs(residual) <= 1e-13 * y) break;
    (residual < 0.0 ? lo : hi) = t;
    const double slope = derivative(t);
    double next = t - residual / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

double ScaleTable::F(double t) const {
  return 1.0 / psi_prime_alpha_ - std::exp(-alpha_ * t) * (*this)(t);
}

double ScaleTable::asymptotic_residual(double t) const {
  return std::exp(-alpha_ * t) * psi_prime_alpha_ * (*this)(t) - 1.0;
}

std::optional<double> inverse_W(const ScaleTable& table, double y) { return table.inverse(y); }

// ---------------------------------------------------------------------------

namespace {

struct GridNodes {
  Eigen::VectorXd grid;
  double step;
};

GridNodes uniform_grid(double t_max, double step) {
  if (!(t_max > 0.0) || !(step > 0.0)) throw std::invalid_argument("scale grid needs t_max > 0 and step > 0");
  const auto cells = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(t_max / step)));
  return {Eigen::VectorXd::LinSpaced(cells + 1, 0.0, t_max), t_max / cells};
}

double table_limit(const ModelParams& params, ExponentKind kind, double alpha) {
  if (kind == ExponentKind::clonal && params.theta > alpha) return clonal_limit(params, alpha);
  return 0.0;
}

}  // namespace

ScaleTable invert_scale(const LaplaceExponent& exponent, double alpha, double t_max, double step,
                        const InversionOptions& options) {
  const ModelParams& params = exponent.params;
  const bool plain = exponent.kind == ExponentKind::plain || params.theta == 0.0;
  const double shift = plain ? alpha : std::max(alpha - params.theta, 0.0);
  auto [grid, h] = uniform_grid(t_max, step);
  const Eigen::Index n = grid.size();
  Eigen::VectorXd values(n), slopes(n);
  values(0) = 1.0;
  slopes(0) = params.birth_rate;

  using cd = std::complex<double>;
  auto shifted = [&](cd lambda) { return 1.0 / exponent(lambda + shift); };

  for (Eigen::Index i = 1; i < n; ++i) {
    const double t = grid(i);
    // One pass for g = e^{-st} W and g', whose transform is lambda g^ - g(0).
    const int m = options.euler_terms;
    const double base = m * std::log(10.0) / 3.0;
    std::vector<double> xi(2 * m + 1, 1.0);
    xi[0] = 0.5;
    xi[2 * m] = std::pow(2.0, -m);
    double binom = 1.0;
    for (int k = 1; k < m; ++k) {
      binom *= static_cast<double>(m - k + 1) / k;
      xi[2 * m - k] = xi[2 * m - k + 1] + std::pow(2.0, -m) * binom;
    }
    double g = 0.0, dg = 0.0;
    for (int k = 0; k <= 2 * m; ++k) {
      const cd lambda = cd(base, std::numbers::pi * k) / t;
      const cd value = shifted(lambda);
      const double eta = (k % 2 == 0 ? 1.0 : -1.0) * xi[k];
      g += eta * value.real();
      dg += eta * (lambda * value - 1.0).real();
    }
    const double scale = std::pow(10.0, m / 3.0) / t;
    g *= scale;
    dg *= scale;
    if (!std::isfinite(g) || !std::isfinite(dg)) {
      throw NumericError("scale inversion produced a non-finite value at t = " + describe(t));
    }
    if (i % options.check_every == 0 || i == n - 1) {
      const double coarse = euler_invert(shifted, t, m - 4);
      if (std::abs(coarse - g) > options.check_tolerance * std::max(std::abs(g), 1.0)) {
        throw NumericError("scale inversion did not converge at t = " + describe(t) +
                           " (gap " + describe(std::abs(coarse - g)) + ")");
      }
    }
    const double grow = std::exp(shift * t);
    values(i) = grow * g;
    slopes(i) = grow * (dg + shift * g);
  }
  if (plain) {
    for (Eigen::Index i = 1; i < n; ++i) {
      if (!(values(i) > values(i - 1))) {
        throw NumericError("inverted W is not increasing at t = " + describe(grid(i)));
      }
    }
  }
  return ScaleTable(plain ? ExponentKind::plain : ExponentKind::clonal, params.theta, alpha,
                    psi_prime_alpha(params, alpha), limit_constant_mu(params),
                    plain ? 0.0 : table_limit(params, ExponentKind::clonal, alpha), std::move(grid),
                    std::move(values), std::move(slopes));
}

ScaleTable build_scale_table(const ModelParams& params, ExponentKind kind, double alpha,
                             double t_max, double step) {
  if (!params.lifetime.is_markovian()) {
    return invert_scale(LaplaceExponent{params, kind}, alpha, t_max, step);
  }
  const bool plain = kind == ExponentKind::plain || params.theta == 0.0;
  const MarkovScale exact{params.birth_rate, params.lifetime.death_rate(), alpha, params.theta,
                          plain ? ExponentKind::plain : ExponentKind::clonal};
  auto [grid, h] = uniform_grid(t_max, step);
  Eigen::VectorXd values(grid.size()), slopes(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    values(i) = exact.value(grid(i));
    slopes(i) = exact.slope(grid(i));
  }
  return ScaleTable(exact.kind, params.theta, alpha, psi_prime_alpha(params, alpha),
                    limit_constant_mu(params), plain ? 0.0 : table_limit(params, kind, alpha),
                    std::move(grid), std::move(values), std::move(slopes), exact);
}

PopulationMoments population_moments(const ModelParams& params, const ScaleTable& W, double t) {
  const double w = W(t);
  double convolution = 0.0;
  if (params.lifetime.kind() != LifetimeKind::infinite && t > 0.0) {
    convolution = params.lifetime.expect([&](double s) { return W(t - s); }, {1e-13, 1e-12, 4000}, t).value;
  }
  return {w - convolution, 1.0 - convolution / w, convolution};
}

Model prepare_model(const ModelParams& params, const GridSpec& grid) {
  Model model;
  model.params = params;
  model.alpha = malthusian_alpha(params);
  model.psi_prime_alpha = psi_prime_alpha(params, model.alpha);
  model.mu = limit_constant_mu(params);
  const double t_max = grid.t_max > 0.0 ? grid.t_max : 20.0 / model.alpha;
  const double step = grid.step > 0.0 ? grid.step : t_max / 2000.0;
  model.W = build_scale_table(params, ExponentKind::plain, model.alpha, t_max, step);
  model.W_theta = build_scale_table(params, ExponentKind::clonal, model.alpha, t_max, step);
  return model;
}

}  // namespace splitree
