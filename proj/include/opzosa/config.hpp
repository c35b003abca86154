#pragma once

#include "opzosa/desk_problem.hpp"
#include "opzosa/geomedian.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opzosa {

/// Configuration error tied to one key ("" when the key is not the issue).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ProblemKind { desk, geomedian };

/// Everything a config file can set. Defaults follow the desk problem for
/// `run` and the desk-scale geometric-median sweep for `bench`.
struct Config {
  // problem.*
  ProblemKind kind = ProblemKind::desk;
  std::optional<Index> n;  // desk: 2, geomedian: 20
  double L = 1.0;
  double radius = 1.0;
  std::optional<double> sigma;  // desk: 0, geomedian: 0.01
  std::optional<double> r;      // desk: 1e-3, geomedian: 1e-2
  std::vector<double> g_center;
  std::vector<double> f_center;
  Index M = 10;
  double lambda = 100.0;
  std::string topology = "star";
  std::optional<PenaltyScale> penalty_scale;
  std::uint64_t data_seed = 1;

  // solver.*
  Algorithm algo = Algorithm::opzosa;
  int N = 20;
  GradientAnchor anchor = GradientAnchor::lower_point;
  std::int64_t T_cap = kDefaultInnerCap;
  std::optional<double> step;
  std::vector<double> step_grid = default_step_grid();
  std::uint64_t seed = 0;

  // bench.*
  std::vector<std::string> topologies = {"star", "cycle", "chain", "complete"};
  std::vector<Algorithm> algorithms = {Algorithm::opzosa, Algorithm::md1, Algorithm::md0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<std::uint64_t> tune_seeds = {1000};
  int md_steps = 0;
  double reference_tol = 1e-6;

  // output.*
  bool timing = false;

  Index dimension() const;
  double noise() const;
  double smoothing_radius() const;

  /// Checks ranges and cross-key constraints; throws ConfigError.
  void validate() const;
  DeskProblemConfig desk() const;
  /// The sweep described by problem.* and bench.*.
  ExperimentConfig experiment() const;
};

/// All accepted keys, in documentation order.
const std::vector<std::string>& config_keys();

/// Applies one `key=value` assignment; throws ConfigError naming the key.
void apply_setting(Config& cfg, const std::string& key, const std::string& value);

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored. `origin` prefixes line numbers in messages.
Config parse_config_text(const std::string& text, const std::string& origin = "config");

/// Reads `path` (if non-empty), then applies `overrides` ("key=value") in
/// order, then validates.
Config load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace opzosa
