// Command-line front end: scale, constants, simulate, clt, ehh, validate.

#include "splitree/config.hpp"
#include "splitree/errors.hpp"
#include "splitree/mc_harness.hpp"
#include "splitree/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace splitree;

namespace {

constexpr const char* kVersion = "1.0.0";

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }
  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string field(double x) { return num(x); }
  static std::string field(int x) { return std::to_string(x); }
  static std::string field(std::int64_t x) { return std::to_string(x); }
  static std::string field(const std::string& s) { return s; }
  static std::string field(const char* s) { return s; }

  fs::path path_;
  std::ofstream out_;
};

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct Context {
  RunConfig config;
  fs::path out;
  std::vector<std::string> written;
  json summary = json::object();

  fs::path file(const std::string& name) {
    written.push_back(name);
    return out / name;
  }
};

json model_summary(const Model& model) {
  json s;
  s["alpha"] = model.alpha;
  s["psi_prime_alpha"] = model.psi_prime_alpha;
  s["mu"] = model.mu;
  s["clonal_limit"] = model.params.theta > model.alpha ? json(clonal_limit(model.params, model.alpha)) : json(nullptr);
  const HypothesisReport h = check_hypotheses(model.params, model.alpha);
  s["hypotheses"] = {{"supercritical", h.supercritical},
                     {"clonal_regime", to_string(h.clonal_regime)},
                     {"thm31_moment_condition", to_string(h.thm31_moment_condition)},
                     {"error_clt_applicable", h.error_clt_applicable}};
  return s;
}

json covariance_json(const CovarianceMatrix& m) {
  return {{"k_list", m.k_list},
          {"entries", matrix_json(m.entries)},
          {"mc_error", matrix_json(m.mc_error)}};
}

// ---------------------------------------------------------------------------

void cmd_scale(Context& ctx, const Model& model) {
  CsvWriter csv(ctx.file("scale.csv"), "t,W,W_theta,survival_prob,expected_N");
  const Eigen::VectorXd& grid = model.W.grid();
  const Eigen::Index stride = std::max<Eigen::Index>(1, (grid.size() - 1) / 400);
  for (Eigen::Index i = 0; i < grid.size(); i += stride) {
    const double t = grid(i);
    const PopulationMoments pm = population_moments(model.params, model.W, t);
    csv.row(t, model.W(t), model.W_theta(t), pm.survival_prob, pm.expected_N);
  }
}

void cmd_constants(Context& ctx, const Model& model) {
  const ExperimentConfig& e = ctx.config.experiment;
  const SpectrumConstants c = compute_constants(model, e.k_max);
  {
    CsvWriter csv(ctx.file("constants.csv"), "k,c_k,tail_bound");
    for (int k = 1; k <= c.k_max; ++k) csv.row(k, c.value(k), c.tail_bound);
  }
  ctx.summary["mass"] = c.mass();
  ctx.summary["tail_bound"] = c.tail_bound;
  if (!(model.params.theta > model.alpha)) {
    ctx.summary["M"] = nullptr;
    ctx.summary["M_note"] = "theta <= alpha: M is not defined";
    return;
  }
  const int cap = *std::max_element(e.k_list.begin(), e.k_list.end());
  MonteCarloJointMoments joint(model, c, cap, e.joint_replicates, e.seed, e.threads);
  CovarianceOptions options;
  options.population_cap = e.population_cap;
  const CovarianceMatrix M = covariance_M(model, c, e.k_list, joint, options);
  ctx.summary["M"] = covariance_json(M);
  ctx.summary["M"]["joint_age_max"] = M.joint_age_max;
  ctx.summary["M"]["joint_tail_bound"] = M.joint_tail_bound;
  ctx.summary["M"]["simulations"] = joint.simulations();
  if (model.params.lifetime.is_markovian()) {
    ctx.summary["K"] = covariance_json(covariance_K_markov(model, c, M));
  }
}

void cmd_simulate(Context& ctx, const Model& model) {
  const ExperimentConfig& e = ctx.config.experiment;
  std::vector<double> checkpoints = e.checkpoints.empty() ? std::vector<double>{e.t} : e.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  ForwardOptions options;
  options.checkpoints = checkpoints;
  options.horizon = e.T > checkpoints.back() ? e.T : checkpoints.back();
  if (model.params.theta > 0.0) {
    options.theta_evals = {model.params.theta};
    options.theta_max = model.params.theta;
  }
  std::vector<ForwardRun> runs(e.replicates);
  parallel_for(e.replicates, e.threads, [&](std::int64_t r) {
    Rng rng(stream_seed(e.seed, static_cast<std::uint64_t>(r)));
    runs[r] = simulate_forward_surviving(model.params, options, rng);
    if (runs[r].truncated) throw NumericError("simulate: population cap exceeded");
  });
  CsvWriter csv(ctx.file("spectrum_ts.csv"), "replicate,time,theta_eval,k,count,N,Z0,E_hat");
  for (int r = 0; r < e.replicates; ++r) {
    const double e_hat = estimate_E(runs[r], model.alpha, model.psi_prime_alpha);
    for (const auto& cp : runs[r].checkpoints) {
      if (cp.spectra.empty()) {
        csv.row(r, cp.time, 0.0, 0, cp.N, cp.N, cp.N, e_hat);
        continue;
      }
      const SpectrumResult& s = cp.spectra.front();
      csv.row(r, cp.time, s.theta_eval, 0, s.clonal, s.N, s.clonal, e_hat);
      for (int k = 1; k <= e.k_max; ++k) csv.row(r, cp.time, s.theta_eval, k, s.count(k), s.N, s.clonal, e_hat);
    }
  }
  ctx.summary["horizon"] = options.horizon;
}

void cmd_clt(Context& ctx, const Model& model) {
  const ExperimentConfig& e = ctx.config.experiment;
  const int cap = *std::max_element(e.k_list.begin(), e.k_list.end());
  const SpectrumConstants c = compute_constants(model, std::max(e.k_max, cap));
  const bool sub = model.params.theta > model.alpha;
  std::optional<CovarianceMatrix> M;
  if (sub) {
    MonteCarloJointMoments joint(model, c, cap, e.joint_replicates, e.seed ^ 0x5bd1e995ULL, e.threads);
    CovarianceOptions options;
    options.population_cap = e.population_cap;
    M = covariance_M(model, c, e.k_list, joint, options);
    ctx.summary["M"] = covariance_json(*M);
  }
  std::vector<double> times = e.checkpoints.empty() ? std::vector<double>{e.t} : e.checkpoints;
  CsvWriter samples(ctx.file("clt_samples.csv"), "replicate,k,statistic,kind");
  CsvWriter diag(ctx.file("diagnostics.csv"), "t,k,var_emp,var_theory,ks,l2");
  json runs = json::array();
  for (double t : times) {
    ExperimentConfig run_config = e;
    run_config.t = t;
    const StatisticSamples s = run_error_clt(model, c, run_config);
    json entry = {{"t", t}, {"exploratory", s.exploratory}};
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      const int k = s.k_list[j];
      for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
        if (times.size() == 1 || t == times.back()) samples.row(static_cast<std::int64_t>(r), k, s.values(r, j), to_string(s.kind));
      }
      const Eigen::VectorXd column = s.values.col(j);
      const double var_emp = stats::summarize(column).variance;
      if (M) {
        const double var_theory = M->entries(j, j);
        const DensityDiagnostics d = density_diagnostics(column, var_theory, e.kde_points, e.bandwidth);
        diag.row(t, k, var_emp, var_theory, d.ks, d.l2);
      } else {
        const auto skew = stats::skewness(column);
        entry["skewness_k" + std::to_string(k)] = {skew.value, skew.se};
        diag.row(t, k, var_emp, std::nan(""), std::nan(""), std::nan(""));
      }
    }
    runs.push_back(entry);
  }
  ctx.summary["clt_runs"] = runs;
}

void cmd_ehh(Context& ctx, const Model& model) {
  ExperimentConfig e = ctx.config.experiment;
  if (e.theta_grid.empty()) throw ConfigError("ehh needs experiment.theta_grid");
  const EhhStudy study = run_ehh(model, e);
  for (const auto& w : study.warnings) std::cerr << "warning: " << w << '\n';
  CsvWriter csv(ctx.file("ehh.csv"), "theta,ehh_exact_mean,ehh_exact_sd,ehh_approx,rel_error");
  for (const auto& row : study.rows) csv.row(row.theta, row.exact_mean, row.exact_sd, row.approx, row.rel_error);
}

// Oracle suite: closed forms against the numerical machinery.
int cmd_validate(Context& ctx, const Model& model) {
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, double measured, double tolerance) {
    const bool pass = std::abs(measured) <= tolerance;
    all = all && pass;
    checks.push_back({{"check", name}, {"measured", measured}, {"tolerance", tolerance}, {"pass", pass}});
    std::cout << (pass ? "PASS " : "FAIL ") << name << " measured=" << num(measured) << " tol=" << num(tolerance) << '\n';
  };

  ModelParams markov;
  markov.birth_rate = 1.0;
  markov.theta = 1.0;
  markov.lifetime = LifetimeModel::exponential(0.5);
  const double a = malthusian_alpha(markov);
  record("alpha exponential(0.5), b=1 equals b-d", a - 0.5, 1e-12);
  record("psi'(alpha) equals alpha/b", psi_prime_alpha(markov, a) - 0.5, 1e-12);
  const ScaleTable W = invert_scale(LaplaceExponent{markov, ExponentKind::plain}, a, 20.0, 0.01);
  const ScaleTable Wt = invert_scale(LaplaceExponent{markov, ExponentKind::clonal}, a, 20.0, 0.01);
  const MarkovScale exact{1.0, 0.5, a, 1.0, ExponentKind::plain};
  const MarkovScale exact_t{1.0, 0.5, a, 1.0, ExponentKind::clonal};
  double err_w = 0.0, err_wt = 0.0;
  for (Eigen::Index i = 0; i < W.grid().size(); ++i) {
    const double t = W.grid()(i);
    err_w = std::max(err_w, std::abs(W(t) / exact.value(t) - 1.0));
    err_wt = std::max(err_wt, std::abs(Wt(t) / exact_t.value(t) - 1.0));
  }
  record("inverted W vs closed form, relative", err_w, 1e-6);
  record("inverted W_theta vs closed form, relative", err_wt, 1e-6);
  record("clonal limit theta/psi(theta) = 3", clonal_limit(markov, a) - 3.0, 1e-10);
  const Model markov_model = prepare_model(markov, {20.0, 0.01});
  const SpectrumConstants mc = compute_constants(markov_model, 200);
  record("sum k c_k = 1 (exponential)", mc.mass() - 1.0, 1e-6);
  record("EHH numerator 2b/(2 theta - alpha)", ehh_approx(markov_model.W_theta) - 4.0 / 3.0, 1e-8);

  // The configured model.
  const SpectrumConstants c = compute_constants(model, 200);
  if (model.params.theta > 0.0) record("sum k c_k = 1 (configured)", c.mass() - 1.0, 1e-6);
  record("E e^{-alpha V} = 1 - alpha/b (configured)",
         model.params.lifetime.laplace_transform(model.alpha) - (1.0 - model.alpha / model.params.birth_rate), 1e-8);
  if (ctx.config.preset == "paper-sec7") record("alpha of the Rice preset within 0.05 of 0.5", model.alpha - 0.5, 0.05);

  ctx.summary["checks"] = checks;
  {
    std::ofstream out(ctx.file("validate.json"), std::ios::binary);
    out << json({{"checks", checks}, {"pass", all}}).dump(2) << '\n';
  }
  return all ? 0 : 2;
}

int run(const std::string& command, Context& ctx) {
  const RunConfig& config = ctx.config;
  const Model model = prepare_model(config.params, config.grid);
  ctx.summary.update(model_summary(model));
  int code = 0;
  if (command == "scale") cmd_scale(ctx, model);
  else if (command == "constants") cmd_constants(ctx, model);
  else if (command == "simulate") cmd_simulate(ctx, model);
  else if (command == "clt") cmd_clt(ctx, model);
  else if (command == "ehh") cmd_ehh(ctx, model);
  else if (command == "validate") code = cmd_validate(ctx, model);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency spectrum of splitting trees with neutral Poisson mutations"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, preset, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--preset", preset, "built-in configuration")->check(CLI::IsMember({"paper-sec7"}));
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"scale", "tabulate W, W_theta, survival probability and E N_t"},
      {"constants", "spectrum constants c_k and the covariance matrices M, K"},
      {"simulate", "forward spectrum time series"},
      {"clt", "error-CLT samples and density diagnostics"},
      {"ehh", "exact vs approximate EHH over a theta grid"},
      {"validate", "closed-form oracle checks"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();

  try {
    Context ctx;
    if (!config_path.empty() && !preset.empty()) throw ConfigError("give either --config or --preset, not both");
    if (!config_path.empty()) {
      ctx.config = load_config(config_path);
    } else if (!preset.empty()) {
      ctx.config = paper_preset();
    } else {
      throw ConfigError("give --config <path> or --preset paper-sec7");
    }
    if (seed) ctx.config.experiment.seed = *seed;
    if (threads) ctx.config.experiment.threads = *threads;
    ctx.out = out_dir;
    fs::create_directories(ctx.out);

    const int code = run(command, ctx);
    {
      std::ofstream out(ctx.file("summary.json"), std::ios::binary);
      out << ctx.summary.dump(2) << '\n';
    }
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["seed"] = ctx.config.experiment.seed;
    manifest["threads"] = ctx.config.experiment.threads;
    manifest["config"] = ctx.config.echo;
    manifest["preset"] = ctx.config.preset;
    manifest["alpha"] = ctx.summary["alpha"];
    manifest["psi_prime_alpha"] = ctx.summary["psi_prime_alpha"];
    manifest["outputs"] = ctx.written;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream(ctx.out / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis rejected: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  }
}
