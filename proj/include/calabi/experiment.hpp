#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "calabi/bounds.hpp"
#include "calabi/flow.hpp"

namespace calabi {

/// Invalid or unknown configuration entry. field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExitStatus : int { kCompleted = 0, kConfigError = 1, kTerminal = 2 };

struct ExperimentConfig {
  std::string experiment = "flow";  // flow, energies, legendre, mollify, bounds, smooth-quartic
  int N = 64;
  int dim = 2;

  /// Built-in name (flat, cosine, quartic-example) or a snapshot path. Empty
  /// selects the experiment's default.
  std::string initial;
  double amplitude = 0.05;  // cosine amplitude

  FlowConfig flow;
  bool lambda_set = false;  // otherwise lambda comes from the constants ledger

  double h = 0.1;                  // mollifier radius
  int m = 16;                      // approximation index
  std::string schedule = "identity";  // identity or search
  std::vector<int> m_list{1, 2, 4, 8};

  SpecialConvexParams special;

  std::filesystem::path out = "out";
  bool snapshots = true;

  /// Throws ConfigError.
  void validate() const;
  /// Initial descriptor after defaulting.
  std::string resolved_initial() const;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"flow",    "energies", "legendre",
                                              "mollify", "bounds",   "smooth-quartic"};
  return names;
}

/// Applies one `key = value` entry. Throws ConfigError for unknown keys and
/// unparsable or out-of-range values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads a flat key-value file (`#` starts a comment), then applies the
/// overrides in order and validates. An empty path means defaults only.
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {},
                              const std::string& experiment = "");

/// Every setting as `key = value` lines; parse_config reproduces the config.
std::string to_config_text(const ExperimentConfig& config);

/// Runs the experiment, writing CSV, snapshots and metadata.json under
/// config.out. Returns kTerminal when a flow ends in blowup or stiffness.
ExitStatus run_experiment(const ExperimentConfig& config);

}  // namespace calabi
