#include "splitree/mc_harness.hpp"

#include "splitree/errors.hpp"
#include "splitree/stats.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <iostream>
#include <thread>

namespace splitree {

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body) {
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(n, 1)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::int64_t i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

SpectrumDraw draw_spectrum(const Model& model, double t, int k_cap, Rng& rng) {
  const CoalescentTree tree = sample_cpp(model.W, t, rng);
  SpectrumDraw out;
  out.N = tree.size();
  out.counts = Eigen::VectorXd::Zero(k_cap);
  const double theta = model.params.theta;
  if (theta == 0.0) {
    out.clonal = out.N;
    return out;
  }
  const auto mutations = scatter_mutations(tree, theta, rng);
  const SpectrumResult spectrum = spectrum_at_rate(tree, mutations, theta);
  out.clonal = spectrum.clonal;
  for (const auto& [k, count] : spectrum.counts) {
    if (k <= k_cap) out.counts(k - 1) = static_cast<double>(count);
  }
  return out;
}

// ---------------------------------------------------------------------------

MonteCarloJointMoments::MonteCarloJointMoments(const Model& model, const SpectrumConstants& constants,
                                               int k_cap, int replicates, std::uint64_t seed,
                                               int threads)
    : model_(model),
      constants_(constants),
      k_cap_(k_cap),
      replicates_(replicates),
      seed_(seed),
      threads_(threads) {
  if (k_cap < 1 || k_cap > constants.k_max) throw std::invalid_argument("k_cap outside 1..k_max");
  if (replicates < 2) throw std::invalid_argument("joint moments need at least two replicates");
}

namespace {

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const Eigen::ArrayXd& x) {
  const double m = x.mean();
  const double var = (x - m).square().sum() / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace

JointMomentEstimate MonteCarloJointMoments::estimate(double age) {
  if (const auto hit = cache_.find(age); hit != cache_.end()) return hit->second;
  const int R = replicates_;
  const int K = k_cap_;
  Eigen::MatrixXd counts(R, K);
  Eigen::ArrayXd pop(R), clonal(R);
  const std::uint64_t node_seed = stream_seed(seed_, std::bit_cast<std::uint64_t>(age));
  parallel_for(R, threads_, [&](std::int64_t r) {
    Rng rng(stream_seed(node_seed, static_cast<std::uint64_t>(r)));
    const SpectrumDraw draw = draw_spectrum(model_, age, K, rng);
    counts.row(r) = draw.counts.transpose();
    pop(r) = static_cast<double>(draw.N);
    clonal(r) = static_cast<double>(draw.clonal);
  });
  simulations_ += R;

  JointMomentEstimate est;
  est.age = age;
  est.replicates = R;
  est.a_z0.resize(K, K);
  est.a_z0_se.resize(K, K);
  est.pair_a.resize(K, K);
  est.pair_a_se.resize(K, K);
  est.pair_error.resize(K, K);
  est.pair_error_se.resize(K, K);
  est.n_z0.resize(K);
  est.n_z0_se.resize(K);
  est.mean_a.resize(K);
  est.mean_a_se.resize(K);
  std::vector<Eigen::ArrayXd> hit(K);
  for (int k = 0; k < K; ++k) hit[k] = (clonal == k + 1).cast<double>();
  for (int k = 0; k < K; ++k) {
    const Eigen::ArrayXd A = counts.col(k).array();
    const MeanSe m = mean_se(A);
    est.mean_a(k) = m.mean;
    est.mean_a_se(k) = m.se;
    const MeanSe n = mean_se(pop * hit[k]);
    est.n_z0(k) = n.mean;
    est.n_z0_se(k) = n.se;
    for (int l = 0; l < K; ++l) {
      const Eigen::ArrayXd B = counts.col(l).array();
      const MeanSe single = mean_se(A * hit[l]);
      est.a_z0(k, l) = single.mean;
      est.a_z0_se(k, l) = single.se;
      const MeanSe pair = mean_se(A * hit[l] + B * hit[k]);
      est.pair_a(k, l) = pair.mean;
      est.pair_a_se(k, l) = pair.se;
      const double ck = constants_.value(k + 1), cl = constants_.value(l + 1);
      const MeanSe err = mean_se((A - ck * pop) * hit[l] + (B - cl * pop) * hit[k]);
      est.pair_error(k, l) = err.mean;
      est.pair_error_se(k, l) = err.se;
    }
  }
  const MeanSe n2 = mean_se(pop.square());
  est.mean_n2 = n2.mean;
  est.mean_n2_se = n2.se;
  cache_.emplace(age, est);
  return est;
}

// ---------------------------------------------------------------------------

std::string to_string(StatisticKind kind) { return kind == StatisticKind::error ? "error" : "limit"; }

namespace {

void check_config(const ExperimentConfig& config, const SpectrumConstants& constants) {
  if (config.replicates < 2) throw ConfigError("replicates must be at least 2");
  if (config.k_list.empty()) throw ConfigError("k_list is empty");
  for (int k : config.k_list) {
    if (k < 1 || k > constants.k_max) throw ConfigError("k_list entry outside 1..k_max");
  }
}

int max_k(const std::vector<int>& k_list) { return *std::max_element(k_list.begin(), k_list.end()); }

}  // namespace

StatisticSamples run_error_clt(const Model& model, const SpectrumConstants& constants,
                               const ExperimentConfig& config) {
  check_config(config, constants);
  StatisticSamples out;
  out.kind = StatisticKind::error;
  out.t = config.t;
  out.k_list = config.k_list;
  out.exploratory = !check_hypotheses(model.params, model.alpha).error_clt_applicable;
  const auto R = config.replicates;
  const auto n = static_cast<Eigen::Index>(config.k_list.size());
  out.values.resize(R, n);
  out.population.resize(R);
  const double scale = model.psi_prime_alpha * std::exp(-0.5 * model.alpha * config.t);
  const int cap = max_k(config.k_list);
  parallel_for(R, config.threads, [&](std::int64_t r) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(r)));
    const SpectrumDraw draw = draw_spectrum(model, config.t, cap, rng);
    out.population(r) = static_cast<double>(draw.N);
    for (Eigen::Index j = 0; j < n; ++j) {
      const int k = config.k_list[j];
      out.values(r, j) = scale * (draw.counts(k - 1) - constants.value(k) * draw.N);
    }
  });
  return out;
}

StatisticSamples run_limit_clt(const Model& model, const SpectrumConstants& constants,
                               const ExperimentConfig& config) {
  check_config(config, constants);
  const double T = config.horizon();
  if (!(T > config.t)) throw ConfigError("limit horizon T must exceed t");
  StatisticSamples out;
  out.kind = StatisticKind::limit;
  out.t = config.t;
  out.k_list = config.k_list;
  out.exploratory = !check_hypotheses(model.params, model.alpha).error_clt_applicable;
  const auto R = config.replicates;
  const auto n = static_cast<Eigen::Index>(config.k_list.size());
  out.values.resize(R, n);
  out.population.resize(R);
  out.e_hat.resize(R);
  ForwardOptions options;
  options.horizon = T;
  options.checkpoints = {config.t};
  options.theta_evals = {model.params.theta};
  options.theta_max = model.params.theta;
  const double growth = std::exp(model.alpha * config.t);
  const double scale = std::exp(-0.5 * model.alpha * config.t);
  parallel_for(R, config.threads, [&](std::int64_t r) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(r)));
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw NumericError("limit CLT: no run survived to T");
      const ForwardRun run = simulate_forward(model.params, options, rng);
      if (run.truncated) throw NumericError("limit CLT: population cap exceeded");
      if (run.terminal_N == 0) continue;
      const double e = estimate_E(run, model.alpha, model.psi_prime_alpha);
      const SpectrumResult& spectrum = run.checkpoints.front().spectra.front();
      out.population(r) = static_cast<double>(spectrum.N);
      out.e_hat(r) = e;
      for (Eigen::Index j = 0; j < n; ++j) {
        const int k = config.k_list[j];
        out.values(r, j) = scale * (model.psi_prime_alpha * spectrum.count(k) -
                                    constants.value(k) * growth * e);
      }
      break;
    }
  });
  return out;
}

DensityDiagnostics density_diagnostics(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                       double variance, int points, double bandwidth) {
  if (samples.size() < 2 || points < 2) throw std::invalid_argument("density diagnostics need data");
  DensityDiagnostics out;
  const stats::Summary s = stats::summarize(samples);
  const double sd = std::sqrt(s.variance);
  out.grid = Eigen::VectorXd::LinSpaced(points, s.mean - 6.0 * sd, s.mean + 6.0 * sd);
  out.bandwidth = bandwidth > 0.0 ? bandwidth : stats::silverman_bandwidth(samples);
  out.kde = stats::kde(samples, out.grid, out.bandwidth);
  out.reference = out.grid.unaryExpr([variance](double x) { return LaplaceLaw::density(x, variance); });
  out.l2 = stats::l2_distance(out.grid, out.kde, out.reference);
  const auto ks = stats::ks_one_sample(std::vector<double>(samples.begin(), samples.end()),
                                       [variance](double x) { return LaplaceLaw::cdf(x, variance); });
  out.ks = ks.statistic;
  out.ks_p = ks.p_value;
  return out;
}

EhhStudy run_ehh(const Model& model, const ExperimentConfig& config) {
  EhhStudy study;
  std::vector<double> grid;
  for (double theta : config.theta_grid) {
    if (theta == 0.0 || theta > model.alpha) {
      grid.push_back(theta);
    } else {
      study.warnings.push_back("theta = " + std::to_string(theta) +
                               " <= alpha skipped (approximation needs the clonal subcritical regime)");
    }
  }
  if (grid.empty()) throw ConfigError("EHH grid has no usable theta");
  std::sort(grid.begin(), grid.end());
  const double theta_max = grid.back();
  for (double theta : grid) {
    if (theta == 0.0) {
      study.numerators.push_back(std::nan(""));
      continue;
    }
    const ScaleTable table = build_scale_table(model.params.with_theta(theta), ExponentKind::clonal,
                                               model.alpha, model.W.t_max(), model.W.step());
    study.numerators.push_back(ehh_approx(table));
  }
  const auto R = config.replicates;
  const auto G = static_cast<Eigen::Index>(grid.size());
  study.exact.resize(R, G);
  study.approx.resize(R, G);
  parallel_for(R, config.threads, [&](std::int64_t r) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(r)));
    // EHH needs two individuals; redraw the rare singleton trees.
    CoalescentTree tree;
    do tree = sample_cpp(model.W, config.t, rng);
    while (tree.size() < 2);
    const auto mutations = theta_max > 0.0 ? scatter_mutations(tree, theta_max, rng)
                                           : std::vector<MutationRecord>{};
    for (Eigen::Index g = 0; g < G; ++g) {
      const SpectrumResult spectrum = spectrum_at_rate(tree, mutations, grid[g]);
      study.exact(r, g) = ehh_exact(spectrum).value();
      study.approx(r, g) = study.numerators[g] / static_cast<double>(tree.size());
    }
  });
  for (Eigen::Index g = 0; g < G; ++g) {
    EhhRow row;
    row.theta = grid[g];
    const Eigen::VectorXd column = study.exact.col(g);
    const stats::Summary s = stats::summarize(column);
    row.exact_mean = s.mean;
    row.exact_sd = std::sqrt(s.variance);
    row.approx = study.approx.col(g).mean();
    if (grid[g] == 0.0) {
      row.rel_error = std::nan("");
    } else {
      std::vector<double> rel(R);
      for (Eigen::Index r = 0; r < R; ++r) {
        rel[r] = std::abs(study.exact(r, g) - study.approx(r, g)) / study.exact(r, g);
      }
      std::nth_element(rel.begin(), rel.begin() + R / 2, rel.end());
      double median = rel[R / 2];
      if (R % 2 == 0) median = 0.5 * (median + *std::max_element(rel.begin(), rel.begin() + R / 2));
      row.rel_error = median;
    }
    study.rows.push_back(row);
  }
  return study;
}

}  // namespace splitree
