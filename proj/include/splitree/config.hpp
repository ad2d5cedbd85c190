#ifndef SPLITREE_CONFIG_HPP
#define SPLITREE_CONFIG_HPP

#include "splitree/mc_harness.hpp"
#include "splitree/scalefn.hpp"

#include <map>
#include <string>
#include <vector>

namespace splitree {

/// Everything one CLI run needs. Parsed from an INI-style file:
///
///   preset = paper-sec7
///   [model]       birth_rate, theta
///   [lifetime]    kind = exponential | infinite | rice | numeric; params
///   [grid]        t_max, step
///   [experiment]  t, T, k_list, replicates, seed, threads, k_max, theta_grid,
///                 checkpoints, joint_replicates, population_cap
///   [diagnostics] points, bandwidth
///
/// `params` is the rate (exponential), "shape, scale" (rice) or the path of a
/// two-column value,density CSV (numeric).
struct RunConfig {
  ModelParams params;
  GridSpec grid;
  ExperimentConfig experiment;
  std::string preset;
  std::map<std::string, std::string> echo;  // "section.key" -> raw value, for the manifest
};

/// Rice(1, 1), b = 1, theta = 1 with the desk-scale experiment defaults.
RunConfig paper_preset();

/// Throws ConfigError naming unknown keys, malformed values or missing lifetime params.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Two-column CSV (value,density), optional header line.
LifetimeModel load_numeric_density(const std::string& path);

}  // namespace splitree

#endif  // SPLITREE_CONFIG_HPP
