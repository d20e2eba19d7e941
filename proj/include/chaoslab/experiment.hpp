#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaoslab/marginals.hpp"
#include "chaoslab/model.hpp"
#include "chaoslab/sampler.hpp"

namespace chaoslab {

struct VerifySettings {
  std::vector<double> lsi_grid;     // tilts l for both LSI scans
  std::vector<double> phi_grid;     // magnetizations h
  std::vector<double> psi_offsets;  // l - h_*
  double psi_alpha = 0.0;
  double psi_m0_mean = 0.0;
  std::optional<double> phi_eps;
  std::vector<double> t1_grid;
  int t1_particles = 32;
};

struct SampleSettings {
  ChainConfig chain;
  bool tune = false;
  double target_acceptance = 0.574;
  int n_chains = 1;
};

struct ExperimentConfig {
  std::string command;  // constants | fixed-point | chaos-scan | verify | sample | jw
  ModelSpec model;
  std::vector<int> n_grid;
  int k_max = 4;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  int threads = 1;
  int node_count = 257;
  EntropyOptions entropy;
  double bound_slack = 1e-12;
  double monotone_slack = 1e-10;
  double scan_tolerance = 1e-9;
  std::optional<std::pair<double, double>> expected_slope;
  VerifySettings verify;
  SampleSettings sample;
  /// FNV-1a of the canonical JSON of everything that affects outputs.
  std::uint64_t hash = 0;
};

/// Parses a JSON config; missing or ill-typed fields raise ConfigError naming
/// the field path (for example "model.theta").
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log N, log H)
};

/// Least squares of log H on log N.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::vector<CheckResult> checks;
  std::vector<std::string> outputs;
  bool all_passed() const;
  std::string to_json() const;
};

/// Executes the configured command and writes its outputs into cfg.output_dir.
RunReport run(const ExperimentConfig& cfg);

std::string hex64(std::uint64_t value);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace chaoslab
