#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thermonet/forecast.hpp"
#include "thermonet/simulator.hpp"
#include "thermonet/training.hpp"

namespace thermonet {

/// Rejected configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSettings {
  std::vector<Architecture> architectures{Architecture::Mlp, Architecture::PhysReg,
                                          Architecture::PhysNet};
  int test_days = 5;
  int validation_days = 5;  ///< carved from the end of the training span for lambda tuning
  int validation_train_days = 120;
  std::vector<double> lambda_grid{0.1, 1.0, 10.0};
  std::vector<std::uint64_t> tuning_seeds;  ///< empty: use the training seeds
  std::map<Architecture, double> fixed_lambda;  ///< skips tuning for that architecture
  std::vector<int> sweep_sizes{15, 30, 45, 60, 90, 120};
  std::vector<int> sweep_horizons{6, 24};
  std::vector<int> horizon_grid{1, 6, 12, 24, 36, 48};
  std::vector<int> horizon_sizes{30, 90, 120};
  HorizonMetric metric = HorizonMetric::AtHorizon;
  int jobs = 1;
  bool record_timing = false;  ///< fill train_seconds in result CSVs (breaks byte-identity)
  bool write_svg = true;
};

struct RunConfig {
  SimulationConfig simulation;
  TrainConfig train;
  ExperimentSettings experiment;
  std::string data_dir = "data";
  std::string output_dir = "out";

  /// Throws ConfigError.
  void validate() const;
};

/// `key = value` lines; `#` starts a comment; blank lines ignored. Throws
/// ConfigError with the line number on malformed input.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Sets one dotted key (`thermal.R_ra`, `train.seeds`, ...). Throws ConfigError
/// for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_settings(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);

/// Every key with its resolved value; parse_config_text + apply_settings on
/// the result reproduces `cfg` exactly.
std::string run_config_to_text(const RunConfig& cfg);

/// `1-20`, `3`, `1,4,9` or mixes such as `1-3,7`.
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Resolves the output root: $THERMONET_OUTPUT_ROOT if set, else `fallback`.
std::string output_root(const std::string& fallback);

}  // namespace thermonet
