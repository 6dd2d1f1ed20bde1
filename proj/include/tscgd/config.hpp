#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tscgd/harness.hpp"
#include "tscgd/problems.hpp"
#include "tscgd/schedule.hpp"
#include "tscgd/solvers.hpp"

namespace tscgd {

/// Fully resolved run configuration. Built from a flat JSON object; every
/// field has a default except `problem`.
struct RunConfig {
  // problem
  std::string problem;
  int levels = 3;
  int d = 0;  // 0: problem default (20 for quad-chain, 50 for risk-regression)
  double sigma = 0.0;
  /// "ramp", "identity", or "explicit" when `A` is given.
  std::string matrix = "ramp";
  std::optional<double> ramp_min;
  std::optional<Eigen::MatrixXd> A;
  std::optional<Vector> b;
  RiskAverseConfig risk;
  nlohmann::json set = "rn";

  // algorithm and stepsizes
  std::string algorithm = "atscgd";
  std::optional<bool> smooth;
  std::string preset;  // empty: picked from algorithm
  std::optional<Rational> exponent_a;
  std::vector<Rational> exponent_b;
  double alpha_multiplier = 1.0;
  std::vector<double> beta_multipliers;
  std::optional<double> sc_lambda;
  double alpha_scale = 1.0;
  bool clamp_beta = true;

  // harness
  std::uint64_t iters = 1000;
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  std::uint64_t stride = 0;  // 0: logarithmic grid
  int points_per_decade = 60;
  std::string out = "out";
  std::uint64_t reference_budget = 300'000;
  std::optional<std::uint64_t> reference_seed;
  double window_fraction = kDefaultWindowFraction;
  std::string init = "warm";
  unsigned threads = 0;
  int points = 20;

  /// Checks cross-field constraints; throws ConfigError naming the key.
  void validate() const;
  /// Resolved config as JSON, suitable for the metadata record.
  nlohmann::json to_json() const;
};

/// Parses a JSON document. Unknown keys and ill-typed values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

Problem build_problem(const RunConfig& config);
AlgorithmKind build_algorithm(const RunConfig& config);
/// Preset or custom schedule, with alpha multiplied by alpha_scale.
StepSchedule build_schedule(const RunConfig& config, const Problem& problem);
RecordGrid build_grid(const RunConfig& config);
TrackerInit build_init(const RunConfig& config);
std::uint64_t resolved_reference_seed(const RunConfig& config);

}  // namespace tscgd
