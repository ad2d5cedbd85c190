#include "splitree/config.hpp"

#include "splitree/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace splitree {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  T value{};
  const std::string s = trim(raw);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + raw + "' as a number");
  }
  return value;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (const auto& item : split_list(raw)) out.push_back(parse_number<T>(key, item));
  return out;
}

LifetimeModel build_lifetime(const std::string& kind, const std::string& params) {
  if (kind == "infinite") return LifetimeModel::infinite();
  if (params.empty()) throw ConfigError("lifetime kind '" + kind + "' needs lifetime.params");
  if (kind == "exponential") {
    const double rate = parse_number<double>("lifetime.params", params);
    if (!(rate > 0.0)) throw ConfigError("exponential rate must be > 0 (use kind = infinite for d = 0)");
    return LifetimeModel::exponential(rate);
  }
  if (kind == "rice") {
    const auto values = parse_numbers<double>("lifetime.params", params);
    if (values.size() != 2) throw ConfigError("rice lifetime needs params = shape, scale");
    return LifetimeModel::rice(values[0], values[1]);
  }
  if (kind == "numeric") return load_numeric_density(params);
  throw ConfigError("unknown lifetime kind '" + kind + "'");
}

}  // namespace

RunConfig paper_preset() {
  RunConfig config;
  config.preset = "paper-sec7";
  config.params.birth_rate = 1.0;
  config.params.theta = 1.0;
  config.params.lifetime = LifetimeModel::rice(1.0, 1.0);
  config.experiment.t = 10.0;
  config.experiment.k_list = {1, 2};
  config.experiment.replicates = 10000;
  config.experiment.theta_grid = {0.0, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  config.experiment.checkpoints = {2.0, 4.0, 6.0, 8.0, 10.0};
  return config;
}

LifetimeModel load_numeric_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open numeric density file '" + path + "'");
  std::vector<double> values, density;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_list(line);
    if (fields.size() != 2) throw ConfigError(path + ":" + std::to_string(number) + ": expected value,density");
    if (values.empty() && density.empty() && !std::isdigit(static_cast<unsigned char>(fields[0][0])) &&
        fields[0][0] != '.') {
      continue;  // header
    }
    values.push_back(parse_number<double>(path, fields[0]));
    density.push_back(parse_number<double>(path, fields[1]));
  }
  return LifetimeModel::numeric(std::move(values), std::move(density));
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(number) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    entries[key] = trim(line.substr(eq + 1));
  }

  static const std::set<std::string> known = {
      "preset", "model.birth_rate", "model.theta", "lifetime.kind", "lifetime.params",
      "grid.t_max", "grid.step", "experiment.t", "experiment.T", "experiment.k_list",
      "experiment.replicates", "experiment.seed", "experiment.threads", "experiment.k_max",
      "experiment.theta_grid", "experiment.checkpoints", "experiment.joint_replicates",
      "experiment.population_cap", "diagnostics.points", "diagnostics.bandwidth"};
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries) {
    if (!known.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& key : unknown) list += (list.empty() ? "" : ", ") + key;
    throw ConfigError(origin + ": unknown config keys: " + list);
  }

  RunConfig config;
  if (const auto it = entries.find("preset"); it != entries.end()) {
    if (it->second != "paper-sec7") throw ConfigError("unknown preset '" + it->second + "'");
    config = paper_preset();
  }
  config.echo = entries;
  auto has = [&](const std::string& key) { return entries.count(key) > 0; };
  auto get = [&](const std::string& key) { return entries.at(key); };

  if (has("model.birth_rate")) config.params.birth_rate = parse_number<double>("model.birth_rate", get("model.birth_rate"));
  if (has("model.theta")) config.params.theta = parse_number<double>("model.theta", get("model.theta"));
  if (has("lifetime.kind")) {
    config.params.lifetime = build_lifetime(get("lifetime.kind"), has("lifetime.params") ? get("lifetime.params") : "");
  } else if (has("lifetime.params")) {
    throw ConfigError("lifetime.params given without lifetime.kind");
  }
  if (has("grid.t_max")) config.grid.t_max = parse_number<double>("grid.t_max", get("grid.t_max"));
  if (has("grid.step")) config.grid.step = parse_number<double>("grid.step", get("grid.step"));

  ExperimentConfig& e = config.experiment;
  if (has("experiment.t")) e.t = parse_number<double>("experiment.t", get("experiment.t"));
  if (has("experiment.T")) e.T = parse_number<double>("experiment.T", get("experiment.T"));
  if (has("experiment.k_list")) e.k_list = parse_numbers<int>("experiment.k_list", get("experiment.k_list"));
  if (has("experiment.replicates")) e.replicates = parse_number<int>("experiment.replicates", get("experiment.replicates"));
  if (has("experiment.seed")) e.seed = parse_number<std::uint64_t>("experiment.seed", get("experiment.seed"));
  if (has("experiment.threads")) e.threads = parse_number<int>("experiment.threads", get("experiment.threads"));
  if (has("experiment.k_max")) e.k_max = parse_number<int>("experiment.k_max", get("experiment.k_max"));
  if (has("experiment.theta_grid")) e.theta_grid = parse_numbers<double>("experiment.theta_grid", get("experiment.theta_grid"));
  if (has("experiment.checkpoints")) e.checkpoints = parse_numbers<double>("experiment.checkpoints", get("experiment.checkpoints"));
  if (has("experiment.joint_replicates")) e.joint_replicates = parse_number<int>("experiment.joint_replicates", get("experiment.joint_replicates"));
  if (has("experiment.population_cap")) e.population_cap = parse_number<double>("experiment.population_cap", get("experiment.population_cap"));
  if (has("diagnostics.points")) e.kde_points = parse_number<int>("diagnostics.points", get("diagnostics.points"));
  if (has("diagnostics.bandwidth")) e.bandwidth = parse_number<double>("diagnostics.bandwidth", get("diagnostics.bandwidth"));

  if (e.replicates < 2) throw ConfigError("experiment.replicates must be >= 2");
  if (e.k_max < 1) throw ConfigError("experiment.k_max must be >= 1");
  if (e.threads < 1) throw ConfigError("experiment.threads must be >= 1");
  for (int k : e.k_list) {
    if (k < 1 || k > e.k_max) throw ConfigError("experiment.k_list entries must lie in 1..k_max");
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace splitree
