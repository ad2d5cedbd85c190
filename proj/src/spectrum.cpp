#include "splitree/spectrum.hpp"

#include "splitree/errors.hpp"
#include "splitree/quadrature.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace splitree {

namespace {

const QuadratureOptions kSmooth{1e-13, 1e-10, 4000};

void require_k(const SpectrumConstants& constants, int k) {
  if (k < 1 || k > constants.k_max) {
    throw std::out_of_range("spectrum index k = " + std::to_string(k) + " outside 1.." +
                            std::to_string(constants.k_max));
  }
}

// theta e^{-theta a} W(a) / W_theta(a)^2 (1 - 1/W_theta(a))^{k-1}
double clonal_density(const Model& model, double a, int k) {
  const double wt = model.W_theta(a);
  const double q = 1.0 - 1.0 / wt;
  return model.params.theta * std::exp(-model.params.theta * a) * model.W(a) / (wt * wt) *
         std::pow(q, k - 1);
}

// 2 int_0^top theta e^{-theta a} W W_theta^{-2} [q^{k-1}(c_l - c_l(a)) + q^{l-1}(c_k - c_k(a))] da
double closed_integral(const Model& model, const SpectrumConstants& constants, int k, int l,
                       double top) {
  auto integrand = [&](double a) {
    const double wt = model.W_theta(a);
    const double q = 1.0 - 1.0 / wt;
    const double base = model.params.theta * std::exp(-model.params.theta * a) * model.W(a) / (wt * wt);
    return base * (std::pow(q, k - 1) * (constants.value(l) - constants.at(l, a)) +
                   std::pow(q, l - 1) * (constants.value(k) - constants.at(k, a)));
  };
  // Split at the table nodes' scale so the adaptive rule sees the smooth pieces.
  double total = 0.0;
  const double piece = 2.0;
  for (double lo = 0.0; lo < top; lo += piece) {
    total += integrate(integrand, lo, std::min(lo + piece, top), kSmooth).value;
  }
  return 2.0 * total;
}

struct JointIntegral {
  Eigen::MatrixXd value;  // indexed like k_list x k_list
  Eigen::MatrixXd error;
  double last_integrand_scale = 0.0;
};

// int_0^top theta W(a)^{-1} pair_error(k, l)(a) da over a composite Gauss-Legendre rule.
JointIntegral joint_integral(const Model& model, const std::vector<int>& k_list, double top,
                             JointMomentProvider& joint, const JointQuadrature& rule) {
  const auto n = static_cast<Eigen::Index>(k_list.size());
  JointIntegral out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), 0.0};
  Eigen::MatrixXd variance = Eigen::MatrixXd::Zero(n, n);
  const auto nodes = composite_gauss_legendre(0.0, top, rule.panels, rule.order);
  for (Eigen::Index i = 0; i < nodes.nodes.size(); ++i) {
    const double a = nodes.nodes(i);
    const JointMomentEstimate est = joint.estimate(a);
    const double factor = nodes.weights(i) * model.params.theta / model.W(a);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index s = 0; s < n; ++s) {
        const int k = k_list[r], l = k_list[s];
        out.value(r, s) += factor * est.pair_error(k - 1, l - 1);
        variance(r, s) += std::pow(factor * est.pair_error_se(k - 1, l - 1), 2);
      }
    }
    if (i + 1 == nodes.nodes.size()) {
      out.last_integrand_scale =
          model.params.theta / model.W(a) * est.pair_error.cwiseAbs().maxCoeff();
    }
  }
  out.error = variance.cwiseSqrt();
  return out;
}

void check_k_list(const SpectrumConstants& constants, const std::vector<int>& k_list,
                  const JointMomentProvider& joint) {
  if (k_list.empty()) throw std::invalid_argument("k_list is empty");
  for (int k : k_list) {
    require_k(constants, k);
    if (k > joint.k_cap()) {
      throw std::out_of_range("joint moment provider covers k <= " + std::to_string(joint.k_cap()));
    }
  }
}

}  // namespace

double SpectrumConstants::value(int k) const {
  require_k(*this, k);
  return c(k - 1);
}

double SpectrumConstants::at(int k, double t) const {
  require_k(*this, k);
  if (t <= 0.0 || theta == 0.0) return 0.0;
  const Eigen::Index last = grid.size() - 1;
  if (t >= grid(last)) return c(k - 1);
  const double h = grid(1) - grid(0);
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / h), last - 1);
  const double s = (t - grid(j)) / h;
  const double y0 = cumulative(j, k - 1), y1 = cumulative(j + 1, k - 1);
  const double d0 = weight(j) * std::pow(ratio(j), k - 1) * h;
  const double d1 = weight(j + 1) * std::pow(ratio(j + 1), k - 1) * h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1;
}

double SpectrumConstants::mass() const {
  double total = 0.0;
  for (int k = k_max; k >= 1; --k) total += k * c(k - 1);
  return total;
}

SpectrumConstants compute_constants(const Model& model, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  SpectrumConstants out;
  out.theta = model.params.theta;
  out.k_max = k_max;
  out.c = Eigen::VectorXd::Zero(k_max);
  const double theta = out.theta;
  if (theta == 0.0) {
    std::cerr << "warning: theta = 0, all spectrum constants are zero\n";
    out.grid = Eigen::Vector2d(0.0, 1.0);
    out.cumulative = Eigen::MatrixXd::Zero(2, k_max);
    out.weight = Eigen::VectorXd::Zero(2);
    out.ratio = Eigen::VectorXd::Zero(2);
    return out;
  }

  // Cut where theta e^{-theta a} < 1e-12; the integrand is at most that.
  const double a_max = std::max(std::log(theta / 1e-12) / theta, 1.0);
  const double h = model.W_theta.step();
  const auto cells = static_cast<Eigen::Index>(std::ceil(a_max / h));
  out.truncation = cells * h;
  out.grid = Eigen::VectorXd::LinSpaced(cells + 1, 0.0, out.truncation);
  out.cumulative = Eigen::MatrixXd::Zero(cells + 1, k_max);
  out.weight.resize(cells + 1);
  out.ratio.resize(cells + 1);

  auto point = [&](double a, double& w, double& q) {
    const double wt = model.W_theta(a);
    q = 1.0 - 1.0 / wt;
    w = theta * std::exp(-theta * a) / (wt * wt);
  };
  for (Eigen::Index j = 0; j <= cells; ++j) point(out.grid(j), out.weight(j), out.ratio(j));

  const GaussLegendreRule rule = gauss_legendre(8);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(k_max);
  double tail = 0.0;
  const double K = k_max;
  for (Eigen::Index j = 0; j < cells; ++j) {
    const double lo = out.grid(j);
    for (Eigen::Index g = 0; g < rule.nodes.size(); ++g) {
      const double a = lo + 0.5 * h * (rule.nodes(g) + 1.0);
      const double wgt = 0.5 * h * rule.weights(g);
      double w, q;
      point(a, w, q);
      double term = w * wgt;
      for (int k = 0; k < k_max; ++k) {
        running(k) += term;
        term *= q;
      }
      // sum_{k > K} k p^2 q^{k-1} = q^K (K + 1 - K q)
      tail += wgt * theta * std::exp(-theta * a) * std::pow(q, K) * (K + 1.0 - K * q);
    }
    out.cumulative.row(j + 1) = running.transpose();
  }
  out.c = running;
  out.tail_bound = tail + std::exp(-theta * out.truncation);
  return out;
}

double mean_spectrum(const Model& model, const SpectrumConstants& constants, int k, double t) {
  if (t <= 0.0) return 0.0;
  return model.W(t) * constants.at(k, t);
}

double clonal_pmf(const Model& model, double t, int k) {
  if (k < 1) throw std::out_of_range("clonal_pmf needs k >= 1");
  const double wt = model.W_theta(t);
  return std::exp(-model.params.theta * t) * model.W(t) / (wt * wt) * std::pow(1.0 - 1.0 / wt, k - 1);
}

double clonal_positive_prob(const Model& model, double t) {
  return std::exp(-model.params.theta * t) * model.W(t) / model.W_theta(t);
}

double expected_NtE(const Model& model, double t) {
  const double decay = std::exp(-model.alpha * t);
  const double conv = population_moments(model.params, model.W, t).convolution;
  return (1.0 + model.alpha / model.params.birth_rate - decay) * model.W(t) - (1.0 - decay) * conv;
}

MomentValue second_moment_spectrum(const Model& model, const SpectrumConstants& constants, int k,
                                   int l, double t, JointMomentProvider& joint,
                                   const JointQuadrature& rule) {
  check_k_list(constants, {k, l}, joint);
  if (constants.theta == 0.0 || t <= 0.0) return {};
  const double w = model.W(t);
  const double ck = constants.at(k, t), cl = constants.at(l, t);
  auto cross = [&](double a) {
    const double wt = model.W_theta(a);
    const double q = 1.0 - 1.0 / wt;
    return 2.0 * model.params.theta * std::exp(-model.params.theta * a) * model.W(a) / (wt * wt) *
           (std::pow(q, l - 1) * constants.at(k, a) + std::pow(q, k - 1) * constants.at(l, a));
  };
  const double closed = integrate(cross, 0.0, t, kSmooth).value;

  double joint_sum = 0.0, joint_var = 0.0;
  const auto nodes = composite_gauss_legendre(0.0, t, rule.panels, rule.order);
  for (Eigen::Index i = 0; i < nodes.nodes.size(); ++i) {
    const double a = nodes.nodes(i);
    const JointMomentEstimate est = joint.estimate(a);
    const double factor = nodes.weights(i) * model.params.theta / model.W(a);
    joint_sum += factor * est.pair_a(k - 1, l - 1);
    joint_var += std::pow(factor * est.pair_a_se(k - 1, l - 1), 2);
  }
  MomentValue out;
  out.value = 2.0 * w * w * ck * cl - w * closed + w * joint_sum + (k == l ? w * ck : 0.0);
  out.mc_error = w * std::sqrt(joint_var);
  return out;
}

MomentValue spectrum_population_moment(const Model& model, const SpectrumConstants& constants,
                                       int k, double t, JointMomentProvider& joint,
                                       const JointQuadrature& rule) {
  check_k_list(constants, {k}, joint);
  if (constants.theta == 0.0 || t <= 0.0) return {};
  const double w = model.W(t);
  const double clonal = integrate([&](double a) { return clonal_density(model, a, k); }, 0.0, t,
                                  kSmooth).value;
  double joint_sum = 0.0, joint_var = 0.0;
  const auto nodes = composite_gauss_legendre(0.0, t, rule.panels, rule.order);
  for (Eigen::Index i = 0; i < nodes.nodes.size(); ++i) {
    const double a = nodes.nodes(i);
    const JointMomentEstimate est = joint.estimate(a);
    const double factor = nodes.weights(i) * model.params.theta / model.W(a);
    joint_sum += factor * est.n_z0(k - 1);
    joint_var += std::pow(factor * est.n_z0_se(k - 1), 2);
  }
  return {2.0 * w * w * constants.at(k, t) - 2.0 * w * clonal + w * joint_sum,
          w * std::sqrt(joint_var)};
}

CovarianceMatrix covariance_M(const Model& model, const SpectrumConstants& constants,
                              const std::vector<int>& k_list, JointMomentProvider& joint,
                              const CovarianceOptions& options) {
  const double theta = model.params.theta;
  if (!(theta > model.alpha)) {
    throw HypothesisError("covariance M needs theta > alpha (clonal subcritical regime)");
  }
  check_k_list(constants, k_list, joint);

  double age_max = options.joint_age_max;
  if (age_max <= 0.0) {
    const double decay = std::log(1e8) / (theta - model.alpha);
    const auto capped = model.W.inverse(std::max(options.population_cap, 1.0));
    age_max = std::min(decay, capped.value_or(model.W.t_max()));
  }

  const auto n = static_cast<Eigen::Index>(k_list.size());
  CovarianceMatrix out;
  out.k_list = k_list;
  out.closed_part.resize(n, n);
  out.diagonal_part.resize(n, n);
  const double pp = model.psi_prime_alpha;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = r; s < n; ++s) {
      const int k = k_list[r], l = k_list[s];
      const double closed = pp * closed_integral(model, constants, k, l, constants.truncation);
      const double diag = pp * ((k == l ? constants.value(k) : 0.0) -
                                constants.value(k) * constants.value(l));
      out.closed_part(r, s) = out.closed_part(s, r) = closed;
      out.diagonal_part(r, s) = out.diagonal_part(s, r) = diag;
    }
  }
  const JointIntegral part = joint_integral(model, k_list, age_max, joint, options.rule);
  out.joint_part = pp * part.value;
  out.mc_error = pp * part.error;
  out.joint_age_max = age_max;
  out.joint_tail_bound = pp * part.last_integrand_scale / (theta - model.alpha);
  out.entries = out.closed_part + out.joint_part + out.diagonal_part;
  return out;
}

CovarianceMatrix covariance_K_markov(const Model& model, const SpectrumConstants& constants,
                                     const CovarianceMatrix& M) {
  const ModelParams& p = model.params;
  if (!p.lifetime.is_markovian()) {
    throw HypothesisError("K is only available for exponential or infinite lifetimes");
  }
  const double d = p.lifetime.death_rate();
  const double factor = d == 0.0 ? 1.0 : (model.alpha / p.birth_rate) * (1.0 - 6.0 * d / model.alpha);
  CovarianceMatrix K = M;
  const auto n = static_cast<Eigen::Index>(M.k_list.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      K.entries(r, s) += factor * constants.value(M.k_list[r]) * constants.value(M.k_list[s]);
    }
  }
  return K;
}

CovarianceMatrix error_covariance_at(const Model& model, const SpectrumConstants& constants,
                                     const std::vector<int>& k_list, double t,
                                     JointMomentProvider& joint, const JointQuadrature& rule) {
  check_k_list(constants, k_list, joint);
  const auto n = static_cast<Eigen::Index>(k_list.size());
  const double w = model.W(t);
  const double pp = model.psi_prime_alpha;
  const double scale = pp * pp * std::exp(-model.alpha * t);
  CovarianceMatrix out;
  out.k_list = k_list;
  out.closed_part.resize(n, n);
  out.diagonal_part.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = r; s < n; ++s) {
      const int k = k_list[r], l = k_list[s];
      const double dk = constants.at(k, t) - constants.value(k);
      const double dl = constants.at(l, t) - constants.value(l);
      const double closed = scale * (2.0 * w * w * dk * dl + w * closed_integral(model, constants, k, l, t));
      const double diag = scale * w * ((k == l ? constants.at(k, t) : 0.0) -
                                       constants.value(k) * constants.value(l));
      out.closed_part(r, s) = out.closed_part(s, r) = closed;
      out.diagonal_part(r, s) = out.diagonal_part(s, r) = diag;
    }
  }
  const JointIntegral part = joint_integral(model, k_list, t, joint, rule);
  out.joint_part = scale * w * part.value;
  out.mc_error = scale * w * part.error;
  out.joint_age_max = t;
  out.entries = out.closed_part + out.joint_part + out.diagonal_part;
  return out;
}

double ehh_approx(const ScaleTable& clonal_table) {
  const double theta = clonal_table.theta();
  if (clonal_table.kind() != ExponentKind::clonal || !(theta > clonal_table.alpha())) {
    throw HypothesisError("EHH approximation needs a clonal table with theta > alpha");
  }
  auto integrand = [&](double x) { return 2.0 * theta * std::exp(-theta * x) * (clonal_table(x) - 1.0); };
  const double top = 36.0 / theta;
  double total = 0.0;
  for (double lo = 0.0; lo < top; lo += 2.0 / theta) {
    total += integrate(integrand, lo, std::min(lo + 2.0 / theta, top), kSmooth).value;
  }
  // Beyond `top` the table sits at its limit.
  return total + 2.0 * (clonal_table.limit() - 1.0) * std::exp(-theta * top);
}

std::string to_string(ClonalRegime regime) {
  switch (regime) {
    case ClonalRegime::sub: return "sub";
    case ClonalRegime::critical: return "critical";
    case ClonalRegime::super: return "super";
  }
  return "?";
}

std::string to_string(MomentCondition condition) {
  switch (condition) {
    case MomentCondition::holds: return "holds";
    case MomentCondition::fails: return "fails";
    case MomentCondition::infinite_hence_holds: return "infinite-hence-holds";
  }
  return "?";
}

HypothesisReport check_hypotheses(const ModelParams& params, double alpha) {
  HypothesisReport report;
  report.supercritical = params.supercritical();
  const double gap = params.theta - alpha;
  const double tol = 1e-12 * std::max(1.0, alpha);
  report.clonal_regime = gap > tol ? ClonalRegime::sub
                         : gap < -tol ? ClonalRegime::super
                                      : ClonalRegime::critical;
  report.error_clt_applicable = report.supercritical && report.clonal_regime == ClonalRegime::sub;

  const LifetimeModel& life = params.lifetime;
  if (report.clonal_regime != ClonalRegime::sub) {
    // e^{(theta - alpha) v} <= 1: the integral cannot exceed one.
    report.moment_integral = life.kind() == LifetimeKind::infinite
                                 ? (gap < -tol ? 0.0 : 1.0)
                                 : life.expect([gap](double v) { return std::exp(gap * v); }).value;
    report.thm31_moment_condition = MomentCondition::fails;
    return report;
  }
  switch (life.kind()) {
    case LifetimeKind::infinite:
      // All mass sits at v = infinity; the theorem excludes this law explicitly.
      report.moment_integral = std::numeric_limits<double>::infinity();
      report.thm31_moment_condition = MomentCondition::fails;
      break;
    case LifetimeKind::exponential: {
      const double d = life.death_rate();
      if (gap >= d) {
        report.moment_integral = std::numeric_limits<double>::infinity();
        report.thm31_moment_condition = MomentCondition::infinite_hence_holds;
      } else {
        report.moment_integral = d / (d - gap);
        report.thm31_moment_condition = MomentCondition::holds;
      }
      break;
    }
    default:
      report.moment_integral = life.expect([gap](double v) { return std::exp(gap * v); }).value;
      report.thm31_moment_condition =
          report.moment_integral > 1.0 ? MomentCondition::holds : MomentCondition::fails;
  }
  return report;
}

}  // namespace splitree
