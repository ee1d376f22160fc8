#pragma once

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "thermonet/dataset.hpp"
#include "thermonet/forecast.hpp"
#include "thermonet/run_config.hpp"
#include "thermonet/training.hpp"

namespace thermonet {

struct TrainSummary {
  std::uint64_t seed = 0;
  std::string error;  ///< empty on success
  LossBreakdown final_loss;
  std::int64_t optimizer_steps = 0;
  int clamp_events = 0;
  double seconds = 0.0;
  PhysicsParams physics;
};

struct Ensemble {
  Architecture architecture = Architecture::Mlp;
  int train_days = 0;
  double lambda = 0.0;
  std::vector<Checkpoint> checkpoints;  ///< successful seeds only
  std::vector<TrainSummary> runs;       ///< every configured seed
};

struct LambdaTrial {
  Architecture architecture = Architecture::PhysReg;
  double lambda = 0.0;
  MetricStats mean;
  MetricStats std;
  bool selected = false;
};

using LogFn = std::function<void(const std::string&)>;

/// Trains and caches ensembles on one trajectory. The test span is always the
/// final test_days; a training size of d days uses the d days before it.
class ExperimentRunner {
 public:
  /// Throws ConfigError if nothing is left before the test span. A training
  /// size that does not fit is rejected with ConfigError when first requested.
  ExperimentRunner(RunConfig cfg, Trajectory traj, LogFn log = {});

  const RunConfig& config() const { return cfg_; }
  const Trajectory& trajectory() const { return traj_; }
  PhysicsParams initial_physics() const;

  std::size_t test_begin() const;
  std::size_t test_end() const { return traj_.size(); }

  /// 0 for the MLP; otherwise the fixed value or the tuned one.
  double lambda_for(Architecture a);
  const std::vector<LambdaTrial>& lambda_trials() const { return trials_; }

  const Ensemble& ensemble(Architecture a, int train_days);
  EvalReport evaluate(const Ensemble& e, int H) const;
  double persistence(int H) const;

 private:
  const Ensemble& train_cached(Architecture a, int train_days, double lambda, const Dataset& data,
                               const std::vector<std::uint64_t>& seeds, bool tuning);
  const Dataset& training_set(int train_days);
  void require_days(int train_days, const char* what) const;

  RunConfig cfg_;
  Trajectory traj_;
  LogFn log_;
  std::map<int, Dataset> train_sets_;
  std::map<std::tuple<Architecture, int, double, bool>, Ensemble> ensembles_;
  std::map<Architecture, double> tuned_;
  std::vector<LambdaTrial> trials_;
};

struct TraceRow {
  std::size_t start = 0;  ///< window start row s
  double time_of_day = 0.0;
  double T_r_next = 0.0;  ///< truth at s+1
  double u_phys = 0.0;    ///< truth at s
  std::optional<double> T_m;
  std::vector<double> pred_T_r_next;  ///< ensemble mean, per architecture
  std::vector<double> pred_u_phys;
  std::vector<double> pred_T_m;
};

struct ValidationResult {
  std::vector<EvalReport> reports;  ///< one per architecture, H = validation horizon
  std::vector<LambdaTrial> trials;
  std::vector<Ensemble> ensembles;
  std::vector<Architecture> architectures;
  std::vector<TraceRow> trace;
  double persistence_mae = 0.0;
};

struct SweepResult {
  std::vector<EvalReport> reports;
  struct Persistence {
    int train_days;
    int horizon;
    double mae;
  };
  std::vector<Persistence> persistence;
  std::vector<Ensemble> ensembles;
};

/// Architectures at H = 1 on validation_train_days, with one-step traces.
ValidationResult run_validation(ExperimentRunner& runner);
/// sweep_sizes x sweep_horizons x architectures, plus persistence.
SweepResult run_size_sweep(ExperimentRunner& runner);
/// horizon_grid x horizon_sizes x architectures, plus persistence.
SweepResult run_horizon_sweep(ExperimentRunner& runner);

/// Result files. Everything except timings.csv is a deterministic function
/// of the configuration (train_seconds stays blank unless record_timing).
void write_validation(const std::string& dir, const ValidationResult& r, const RunConfig& cfg);
void write_sweep(const std::string& dir, const std::string& name, const SweepResult& r,
                 const RunConfig& cfg, bool by_size);

std::string lambda_trials_csv(const std::vector<LambdaTrial>& trials);
std::string training_report_csv(const std::vector<Ensemble>& ensembles);
std::string timings_csv(const std::vector<Ensemble>& ensembles);

}  // namespace thermonet
