#include "splitree/lifetimes.hpp"

#include "splitree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace splitree {

std::string to_string(LifetimeKind kind) {
  switch (kind) {
    case LifetimeKind::exponential: return "exponential";
    case LifetimeKind::infinite: return "infinite";
    case LifetimeKind::rice: return "rice";
    case LifetimeKind::numeric: return "numeric";
  }
  return "unknown";
}

namespace {

// I_nu(x) * exp(-x), safe for large x.
double scaled_bessel_i(int order, double x) {
  if (x < 500.0) return std::cyl_bessel_i(static_cast<double>(order), x) * std::exp(-x);
  const double mu = 4.0 * order * order;
  const double inv = 1.0 / (8.0 * x);
  const double series = 1.0 - (mu - 1.0) * inv + (mu - 1.0) * (mu - 9.0) * inv * inv / 2.0;
  return series / std::sqrt(2.0 * std::numbers::pi * x);
}

double rice_density(double v, double nu, double sigma) {
  if (v <= 0.0) return 0.0;
  const double s2 = sigma * sigma;
  const double x = v * nu / s2;
  const double gauss = std::exp(-(v - nu) * (v - nu) / (2.0 * s2));
  return v / s2 * gauss * scaled_bessel_i(0, x);
}

double rice_slope(double v, double nu, double sigma) {
  const double s2 = sigma * sigma;
  const double x = v * nu / s2;
  const double gauss = std::exp(-(v - nu) * (v - nu) / (2.0 * s2));
  return gauss / s2 *
         ((1.0 - v * v / s2) * scaled_bessel_i(0, x) + x * scaled_bessel_i(1, x));
}

constexpr double kTailDensity = 1e-14;

const QuadratureOptions kTight{1e-14, 1e-12, 8000};

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseCubicDensity

PiecewiseCubicDensity PiecewiseCubicDensity::hermite(double lo, double step,
                                                     const Eigen::VectorXd& values,
                                                     const Eigen::VectorXd& slopes) {
  PiecewiseCubicDensity table;
  const Eigen::Index cells = values.size() - 1;
  table.edges_.resize(cells + 1);
  table.coeffs_.resize(cells);
  for (Eigen::Index j = 0; j <= cells; ++j) table.edges_[j] = lo + step * j;
  for (Eigen::Index j = 0; j < cells; ++j) {
    const double f0 = values(j), f1 = values(j + 1);
    const double d0 = slopes(j), d1 = slopes(j + 1);
    const double h = step;
    const double delta = (f1 - f0) / h;
    table.coeffs_[j] = {f0, d0, (3.0 * delta - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * delta) / (h * h)};
  }
  return table;
}

PiecewiseCubicDensity PiecewiseCubicDensity::linear(const std::vector<double>& nodes,
                                                    const std::vector<double>& density) {
  PiecewiseCubicDensity table;
  table.edges_ = nodes;
  table.coeffs_.resize(nodes.size() - 1);
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const double h = nodes[j + 1] - nodes[j];
    table.coeffs_[j] = {density[j], (density[j + 1] - density[j]) / h, 0.0, 0.0};
  }
  return table;
}

double PiecewiseCubicDensity::operator()(double v) const {
  if (edges_.empty() || v < edges_.front() || v >= edges_.back()) return 0.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
  const auto j = static_cast<std::size_t>(it - edges_.begin()) - 1;
  const double u = v - edges_[j];
  const auto& c = coeffs_[j];
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

std::complex<double> PiecewiseCubicDensity::laplace(std::complex<double> z) const {
  using cd = std::complex<double>;
  static const GaussLegendreRule rule = gauss_legendre(8);
  const cd inv = 1.0 / z;
  const cd inv2 = inv * inv, inv3 = inv2 * inv, inv4 = inv3 * inv;
  cd total = 0.0;
  cd shift = edges_.empty() ? cd(0.0) : std::exp(-z * edges_.front());
  double cached_h = -1.0;
  cd step_factor;
  std::array<cd, 8> node_factors{};
  std::array<double, 8> node_offsets{};
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    const double h = edges_[j + 1] - edges_[j];
    if (h != cached_h) {
      cached_h = h;
      step_factor = std::exp(-z * h);
      for (int i = 0; i < 8; ++i) {
        node_offsets[i] = 0.5 * h * (rule.nodes(i) + 1.0);
        node_factors[i] = 0.5 * h * rule.weights(i) * std::exp(-z * node_offsets[i]);
      }
    }
    const auto& c = coeffs_[j];
    cd cell;
    if (std::abs(z) * h > 1.0) {
      // Repeated integration by parts terminates for a cubic.
      auto antiderivative = [&](double u) {
        const double p = c[0] + u * (c[1] + u * (c[2] + u * c[3]));
        const double p1 = c[1] + u * (2.0 * c[2] + 3.0 * c[3] * u);
        const double p2 = 2.0 * c[2] + 6.0 * c[3] * u;
        const double p3 = 6.0 * c[3];
        return p * inv + p1 * inv2 + p2 * inv3 + p3 * inv4;
      };
      cell = antiderivative(0.0) - step_factor * antiderivative(h);
    } else {
      for (int i = 0; i < 8; ++i) {
        const double u = node_offsets[i];
        cell += node_factors[i] * (c[0] + u * (c[1] + u * (c[2] + u * c[3])));
      }
    }
    total += shift * cell;
    shift *= step_factor;
  }
  return total;
}

// ---------------------------------------------------------------------------
// LifetimeModel

LifetimeModel::LifetimeModel(Law law) : law_(std::move(law)) {}

LifetimeModel LifetimeModel::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("exponential lifetime needs a finite rate > 0 (use the infinite law for d = 0)");
  }
  LifetimeModel model(Exponential{rate});
  model.upper_ = 40.0 / rate;
  model.mean_ = 1.0 / rate;
  return model;
}

LifetimeModel LifetimeModel::infinite() {
  LifetimeModel model(Infinite{});
  model.upper_ = kNever;
  model.mean_ = kNever;
  return model;
}

LifetimeModel LifetimeModel::rice(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("rice lifetime needs shape > 0 and scale > 0");
  LifetimeModel model(Rice{shape, scale});
  double v = shape + scale;
  while (rice_density(v, shape, scale) > kTailDensity) v += 0.25 * scale;
  model.upper_ = v;

  const double step = scale / 128.0;
  const auto cells = static_cast<Eigen::Index>(std::ceil(v / step));
  Eigen::VectorXd values(cells + 1), slopes(cells + 1);
  for (Eigen::Index j = 0; j <= cells; ++j) {
    values(j) = rice_density(j * step, shape, scale);
    slopes(j) = rice_slope(j * step, shape, scale);
  }
  model.table_ = std::make_shared<const PiecewiseCubicDensity>(
      PiecewiseCubicDensity::hermite(0.0, step, values, slopes));
  model.mean_ = model.expect([](double x) { return x; }, kTight).value;
  return model;
}

LifetimeModel LifetimeModel::numeric(std::vector<double> values, std::vector<double> density) {
  if (values.size() < 2 || values.size() != density.size()) {
    throw ConfigError("numeric lifetime needs at least two (value, density) rows of equal length");
  }
  if (values.front() < 0.0) throw ConfigError("numeric lifetime support must be non-negative");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw ConfigError("numeric lifetime values must be strictly increasing");
    }
    if (!(density[i] >= 0.0) || !std::isfinite(density[i])) {
      throw ConfigError("numeric lifetime density must be finite and non-negative");
    }
  }
  auto cdf = std::make_shared<std::vector<double>>(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    (*cdf)[i] = (*cdf)[i - 1] + 0.5 * (values[i] - values[i - 1]) * (density[i] + density[i - 1]);
  }
  if (std::abs(cdf->back() - 1.0) > 1e-8) {
    throw ConfigError("numeric lifetime density integrates to " + std::to_string(cdf->back()) +
                      ", expected 1 within 1e-8");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double x0 = values[i], x1 = values[i + 1];
    mean += (x1 - x0) / 6.0 * (density[i] * (2.0 * x0 + x1) + density[i + 1] * (x0 + 2.0 * x1));
  }
  auto table = std::make_shared<const PiecewiseCubicDensity>(PiecewiseCubicDensity::linear(values, density));
  LifetimeModel model(Numeric{std::move(values), std::move(density)});
  model.upper_ = table->upper();
  model.mean_ = mean;
  model.table_ = std::move(table);
  model.numeric_cdf_ = std::move(cdf);
  return model;
}

LifetimeKind LifetimeModel::kind() const {
  return static_cast<LifetimeKind>(law_.index());
}

double LifetimeModel::death_rate() const {
  if (const auto* e = std::get_if<Exponential>(&law_)) return e->rate;
  return 0.0;
}

double LifetimeModel::survival(double t) const {
  if (t <= 0.0) return 1.0;
  switch (kind()) {
    case LifetimeKind::exponential: return std::exp(-std::get<Exponential>(law_).rate * t);
    case LifetimeKind::infinite: return 1.0;
    case LifetimeKind::rice: {
      if (t >= upper_) return 0.0;
      const auto& r = std::get<Rice>(law_);
      auto f = [&](double v) { return rice_density(v, r.shape, r.scale); };
      if (t < r.shape) return std::clamp(1.0 - integrate(f, 0.0, t, kTight).value, 0.0, 1.0);
      return std::clamp(integrate(f, t, upper_, kTight).value, 0.0, 1.0);
    }
    case LifetimeKind::numeric: {
      const auto& n = std::get<Numeric>(law_);
      if (t <= n.values.front()) return 1.0;
      if (t >= n.values.back()) return 0.0;
      const auto it = std::upper_bound(n.values.begin(), n.values.end(), t);
      const auto j = static_cast<std::size_t>(it - n.values.begin()) - 1;
      const double u = t - n.values[j];
      const double slope = (n.density[j + 1] - n.density[j]) / (n.values[j + 1] - n.values[j]);
      const double partial = n.density[j] * u + 0.5 * slope * u * u;
      const double total = numeric_cdf_->back();
      return std::clamp(1.0 - ((*numeric_cdf_)[j] + partial) / total, 0.0, 1.0);
    }
  }
  return 1.0;
}

double LifetimeModel::density(double v) const {
  if (v <= 0.0) return 0.0;
  switch (kind()) {
    case LifetimeKind::exponential: {
      const double d = std::get<Exponential>(law_).rate;
      return d * std::exp(-d * v);
    }
    case LifetimeKind::infinite: return 0.0;
    case LifetimeKind::rice: {
      const auto& r = std::get<Rice>(law_);
      return rice_density(v, r.shape, r.scale);
    }
    case LifetimeKind::numeric: return (*table_)(v);
  }
  return 0.0;
}

double LifetimeModel::laplace_transform(double lambda) const {
  if (lambda <= 0.0) return 1.0;
  switch (kind()) {
    case LifetimeKind::exponential: {
      const double d = std::get<Exponential>(law_).rate;
      return d / (d + lambda);
    }
    case LifetimeKind::infinite: return 0.0;
    default:
      return expect([lambda](double v) { return std::exp(-lambda * v); }, kTight).value;
  }
}

double LifetimeModel::one_minus_laplace(double lambda) const {
  if (lambda <= 0.0) return 0.0;
  switch (kind()) {
    case LifetimeKind::exponential: {
      const double d = std::get<Exponential>(law_).rate;
      return lambda / (d + lambda);
    }
    case LifetimeKind::infinite: return 1.0;
    default:
      return expect([lambda](double v) { return -std::expm1(-lambda * v); }, kTight).value;
  }
}

std::complex<double> LifetimeModel::laplace_transform(std::complex<double> z) const {
  switch (kind()) {
    case LifetimeKind::exponential: {
      const double d = std::get<Exponential>(law_).rate;
      return d / (d + z);
    }
    case LifetimeKind::infinite: return z == 0.0 ? 1.0 : 0.0;
    default: return table_->laplace(z);
  }
}

double LifetimeModel::mean() const { return mean_; }

double LifetimeModel::sample(Rng& rng) const {
  switch (kind()) {
    case LifetimeKind::exponential: return rng.exponential(std::get<Exponential>(law_).rate);
    case LifetimeKind::infinite: return kNever;
    case LifetimeKind::rice: {
      const auto& r = std::get<Rice>(law_);
      const double x = r.shape + r.scale * rng.normal();
      const double y = r.scale * rng.normal();
      return std::hypot(x, y);
    }
    case LifetimeKind::numeric: {
      const auto& n = std::get<Numeric>(law_);
      const auto& cdf = *numeric_cdf_;
      const double target = rng.uniform() * cdf.back();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
      const auto j = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1) - 1;
      const double h = n.values[j + 1] - n.values[j];
      const double f0 = n.density[j];
      const double slope = (n.density[j + 1] - f0) / h;
      const double rest = target - cdf[j];
      double u;
      if (std::abs(slope) < 1e-14) {
        u = f0 > 0.0 ? rest / f0 : 0.5 * h;
      } else {
        // f0 u + slope u^2 / 2 = rest, take the root inside the cell.
        const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * rest);
        u = 2.0 * rest / (f0 + std::sqrt(disc));
      }
      return n.values[j] + std::clamp(u, 0.0, h);
    }
  }
  return kNever;
}

}  // namespace splitree
