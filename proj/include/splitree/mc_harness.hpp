#ifndef SPLITREE_MC_HARNESS_HPP
#define SPLITREE_MC_HARNESS_HPP

#include "splitree/forward.hpp"
#include "splitree/laplace_law.hpp"
#include "splitree/simulator.hpp"
#include "splitree/spectrum.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace splitree {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited once; callers write results by index, so output never depends on
/// the thread count.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body);

struct ExperimentConfig {
  double t = 10.0;
  double T = 0.0;  // limit horizon; 0 selects 2t
  std::vector<int> k_list{1};
  int replicates = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  int k_max = 20;
  std::vector<double> theta_grid;   // EHH study
  std::vector<double> checkpoints;  // time series of `simulate`
  int kde_points = 512;
  double bandwidth = 0.0;           // 0 selects Silverman's rule
  int joint_replicates = 10000;     // per quadrature node of M
  double population_cap = 4000.0;   // largest W(a) simulated for M's joint part

  double horizon() const { return T > 0.0 ? T : 2.0 * t; }
};

/// Joint moments of a CPP at age a estimated from independent replicates;
/// memoized per age.
class MonteCarloJointMoments : public JointMomentProvider {
 public:
  MonteCarloJointMoments(const Model& model, const SpectrumConstants& constants, int k_cap,
                         int replicates, std::uint64_t seed, int threads = 1);

  int k_cap() const override { return k_cap_; }
  JointMomentEstimate estimate(double age) override;
  std::int64_t simulations() const { return simulations_; }

 private:
  const Model& model_;
  const SpectrumConstants& constants_;
  int k_cap_;
  int replicates_;
  std::uint64_t seed_;
  int threads_;
  std::int64_t simulations_ = 0;
  std::map<double, JointMomentEstimate> cache_;
};

/// One CPP replicate at time t: population, clonal family and A(k, t) for k <= k_cap.
struct SpectrumDraw {
  std::int64_t N = 0;
  std::int64_t clonal = 0;
  Eigen::VectorXd counts;  // counts(k - 1) = A(k, t)
};

SpectrumDraw draw_spectrum(const Model& model, double t, int k_cap, Rng& rng);

enum class StatisticKind { error, limit };
std::string to_string(StatisticKind kind);

struct StatisticSamples {
  StatisticKind kind = StatisticKind::error;
  double t = 0.0;
  std::vector<int> k_list;
  Eigen::MatrixXd values;       // replicates x k_list
  Eigen::VectorXd population;   // N_t per replicate
  Eigen::VectorXd e_hat;        // limit kind only
  bool conditioned = true;      // on N_t > 0 (error) or N_T > 0 (limit)
  bool exploratory = false;     // hypotheses of the limit theorem not met
};

/// psi'(alpha)(A(k,t) - c_k N_t) / e^{alpha t/2} over CPP replicates at time t.
StatisticSamples run_error_clt(const Model& model, const SpectrumConstants& constants,
                               const ExperimentConfig& config);

/// (psi'(alpha) A(k,t) - c_k e^{alpha t} E-hat) / e^{alpha t/2} over forward runs
/// to T, conditioned on N_T > 0.
StatisticSamples run_limit_clt(const Model& model, const SpectrumConstants& constants,
                               const ExperimentConfig& config);

struct DensityDiagnostics {
  Eigen::VectorXd grid;
  Eigen::VectorXd kde;
  Eigen::VectorXd reference;
  double bandwidth = 0.0;
  double l2 = 0.0;
  double ks = 0.0;
  double ks_p = 0.0;
};

/// KDE of the samples against the univariate Laplace density with `variance`.
DensityDiagnostics density_diagnostics(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                       double variance, int points = 512, double bandwidth = 0.0);

struct EhhRow {
  double theta = 0.0;
  double exact_mean = 0.0;
  double exact_sd = 0.0;
  double approx = 0.0;     // mean over replicates of numerator / N
  double rel_error = 0.0;  // median over replicates of |exact - approx| / exact
};

struct EhhStudy {
  std::vector<EhhRow> rows;
  std::vector<double> numerators;  // per grid theta
  Eigen::MatrixXd exact;           // replicates x grid
  Eigen::MatrixXd approx;
  std::vector<std::string> warnings;
};

/// One marked CPP per replicate at time t, thinned at every theta of the grid.
/// Grid points in (0, alpha] are skipped; theta = 0 keeps only the exact value 1.
EhhStudy run_ehh(const Model& model, const ExperimentConfig& config);

}  // namespace splitree

#endif  // SPLITREE_MC_HARNESS_HPP
