#ifndef SPLITREE_SPECTRUM_HPP
#define SPLITREE_SPECTRUM_HPP

#include "splitree/scalefn.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace splitree {

/// c_k = int_0^inf theta e^{-theta a} W_theta(a)^{-2} (1 - 1/W_theta(a))^{k-1} da
/// and the partial integrals c_k(t), tabulated for k = 1..k_max.
struct SpectrumConstants {
  double theta = 0.0;
  int k_max = 0;
  Eigen::VectorXd c;            // c(k - 1) = c_k
  double tail_bound = 0.0;      // sum_{k > k_max} k c_k plus the mass cut at `truncation`
  double truncation = 0.0;      // a_max of the integral
  Eigen::VectorXd grid;         // nodes of the c_k(t) table
  Eigen::MatrixXd cumulative;   // cumulative(j, k - 1) = c_k(grid(j))
  Eigen::VectorXd weight;       // theta e^{-theta a} / W_theta(a)^2 at the nodes
  Eigen::VectorXd ratio;        // 1 - 1/W_theta(a) at the nodes

  double value(int k) const;
  /// c_k(t); equals c_k past the truncation point.
  double at(int k, double t) const;
  /// sum_{k <= k_max} k c_k.
  double mass() const;
};

/// Default grid step is the scale table's. theta = 0 yields structural zeros.
SpectrumConstants compute_constants(const Model& model, int k_max = 20);

/// E_t A(k, t) = W(t) c_k(t).
double mean_spectrum(const Model& model, const SpectrumConstants& constants, int k, double t);

/// P(Z_0 = k | N_t > 0) = e^{-theta t} W / W_theta^2 (1 - 1/W_theta)^{k-1}.
double clonal_pmf(const Model& model, double t, int k);
/// P(Z_0 > 0 | N_t > 0) = e^{-theta t} W / W_theta.
double clonal_positive_prob(const Model& model, double t);

/// E[N_t E] = (1 + alpha/b - e^{-alpha t}) W(t) - (1 - e^{-alpha t}) W*P_V(t).
double expected_NtE(const Model& model, double t);

/// Monte Carlo moments of one CPP at age a, for k, l = 1..k_cap.
struct JointMomentEstimate {
  double age = 0.0;
  int replicates = 0;
  Eigen::MatrixXd a_z0;          // E_a[A(k,a) 1{Z_0(a) = l}]       (k-1, l-1)
  Eigen::MatrixXd a_z0_se;
  Eigen::MatrixXd pair_a;        // E_a[A(k) 1{Z_0=l} + A(l) 1{Z_0=k}]
  Eigen::MatrixXd pair_a_se;
  Eigen::MatrixXd pair_error;    // E_a[(A(k)-c_k N) 1{Z_0=l} + (A(l)-c_l N) 1{Z_0=k}]
  Eigen::MatrixXd pair_error_se;
  Eigen::VectorXd n_z0;          // E_a[N_a 1{Z_0(a) = k}]
  Eigen::VectorXd n_z0_se;
  Eigen::VectorXd mean_a;        // E_a[A(k, a)]
  Eigen::VectorXd mean_a_se;
  double mean_n2 = 0.0;          // E_a[N_a^2]
  double mean_n2_se = 0.0;
};

/// Source of the moments of type E_a[A(k,a) 1{Z_0(a)=l}].
class JointMomentProvider {
 public:
  virtual ~JointMomentProvider() = default;
  virtual int k_cap() const = 0;
  virtual JointMomentEstimate estimate(double age) = 0;
};

struct MomentValue {
  double value = 0.0;
  double mc_error = 0.0;
};

struct JointQuadrature {
  int panels = 8;
  int order = 8;
};

/// E_t[A(k,t) A(l,t)] from the five-term second-moment formula.
MomentValue second_moment_spectrum(const Model& model, const SpectrumConstants& constants, int k,
                                   int l, double t, JointMomentProvider& joint,
                                   const JointQuadrature& rule = {});

/// E_t[A(k,t) N_t].
MomentValue spectrum_population_moment(const Model& model, const SpectrumConstants& constants,
                                       int k, double t, JointMomentProvider& joint,
                                       const JointQuadrature& rule = {});

struct CovarianceMatrix {
  std::vector<int> k_list;
  Eigen::MatrixXd entries;
  Eigen::MatrixXd mc_error;
  // Ingredients of M, kept for reporting.
  Eigen::MatrixXd closed_part;
  Eigen::MatrixXd joint_part;
  Eigen::MatrixXd diagonal_part;
  double joint_age_max = 0.0;    // upper end of the Monte Carlo age integral
  double joint_tail_bound = 0.0; // estimated weight of the integrand beyond joint_age_max
};

struct CovarianceOptions {
  JointQuadrature rule{8, 8};
  double joint_age_max = 0.0;  // 0 selects min(decay point, age with W(a) = population_cap)
  double population_cap = 4000.0;
};

/// Covariance of the Laplace limit of psi'(alpha)(A(k,t) - c_k N_t) / e^{alpha t / 2}.
/// Requires theta > alpha.
CovarianceMatrix covariance_M(const Model& model, const SpectrumConstants& constants,
                              const std::vector<int>& k_list, JointMomentProvider& joint,
                              const CovarianceOptions& options = {});

/// Exponential or infinite lifetimes: K = M + c_k c_l (alpha/b)(1 - 6 d/alpha).
CovarianceMatrix covariance_K_markov(const Model& model, const SpectrumConstants& constants,
                                     const CovarianceMatrix& M);

/// Finite-t analogue of M: psi'^2 e^{-alpha t} E_t[(A(k)-c_k N)(A(l)-c_l N)].
CovarianceMatrix error_covariance_at(const Model& model, const SpectrumConstants& constants,
                                     const std::vector<int>& k_list, double t,
                                     JointMomentProvider& joint, const JointQuadrature& rule = {});

/// Numerator int_0^inf 2 theta e^{-theta x} (W_theta(x) - 1) dx of the EHH approximation,
/// with W_theta the clonal table at theta = theta_eval > alpha.
double ehh_approx(const ScaleTable& clonal_table);

enum class ClonalRegime { sub, critical, super };
enum class MomentCondition { holds, fails, infinite_hence_holds };

std::string to_string(ClonalRegime regime);
std::string to_string(MomentCondition condition);

struct HypothesisReport {
  bool supercritical = false;
  ClonalRegime clonal_regime = ClonalRegime::sub;
  MomentCondition thm31_moment_condition = MomentCondition::fails;
  double moment_integral = 0.0;  // int e^{(theta-alpha) v} P_V(dv)
  bool error_clt_applicable = false;
};

HypothesisReport check_hypotheses(const ModelParams& params, double alpha);

}  // namespace splitree

#endif  // SPLITREE_SPECTRUM_HPP
