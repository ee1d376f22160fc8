#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermonet/checkpoint.hpp"
#include "thermonet/simulator.hpp"

namespace thermonet {

/// A batch of B rollouts starting at rows s_b, in physical units.
struct ForecastInputs {
  Eigen::MatrixXd temp_window;   ///< (k+1) x B: T_r,s-k .. T_r,s, oldest first
  Eigen::MatrixXd power_window;  ///< (k+1) x B: u_phys,s-k-1 .. u_phys,s-1
  Eigen::MatrixXd actions;       ///< steps x B: u_s .. u_s+steps-1
  Eigen::MatrixXd time_of_day;   ///< steps x B, hours
  Eigen::MatrixXd T_a;           ///< steps x B

  Eigen::Index batch() const { return temp_window.cols(); }
  Eigen::Index steps() const { return actions.rows(); }
};

/// Inputs for rollouts of `steps` starting at each row in `starts`. Throws
/// std::invalid_argument if a window reaches before row 0 or the exogenous
/// data runs out.
ForecastInputs forecast_inputs(const Trajectory& traj, std::span<const std::size_t> starts,
                               int depth, int steps);

struct ForecastOutputs {
  Eigen::MatrixXd T_r;     ///< H x B: predicted T_r,s+1 .. T_r,s+H
  Eigen::MatrixXd u_phys;  ///< H x B: predicted u_phys,s .. u_phys,s+H-1, clamped to [0, u_max]
  Eigen::MatrixXd latent;  ///< H x B: decoded latent for rows s .. s+H-1 (degC); empty without a latent
};

/// Feeds each one-step prediction back into the history windows. Only the
/// initial windows, actions, and exogenous inputs are read. Throws
/// std::invalid_argument if H < 1 or H exceeds the supplied exogenous steps.
ForecastOutputs recursive_forecast(const Checkpoint& ckpt, const ForecastInputs& in, int H);

/// out[j] predicts series[j + H] as series[j]; returns series.size() - H values.
std::vector<double> persistence_forecast(std::span<const double> series, int H);

enum class HorizonMetric { AtHorizon, PathAverage };

std::string to_string(HorizonMetric m);
HorizonMetric horizon_metric_from_string(const std::string& s);

/// Every start s with its full history inside [begin, end) and s + H < end.
std::vector<std::size_t> test_window_starts(std::size_t begin, std::size_t end, int depth, int H);

struct SeedMetrics {
  std::uint64_t seed = 0;
  double mae_T_r = 0.0;
  double mae_u = 0.0;
  std::optional<double> mae_T_m;  ///< absent when the data has no hidden state
  std::optional<double> train_seconds;
};

struct MetricStats {
  double mae_T_r = 0.0;
  double mae_u = 0.0;
  std::optional<double> mae_T_m;
};

struct EvalReport {
  Architecture architecture = Architecture::Mlp;
  int train_days = 0;
  int horizon = 1;
  HorizonMetric metric = HorizonMetric::AtHorizon;
  std::size_t windows = 0;
  bool latent_stub = false;  ///< T_m error uses the constant-latent stub
  std::vector<SeedMetrics> per_seed;
  MetricStats mean;
  MetricStats std;  ///< population standard deviation over per_seed
};

/// Rolls out every checkpoint from each window start in [test_begin, test_end).
/// Models without a latent are scored on T_m with a constant stub equal to the
/// training mean of T_r. Throws std::invalid_argument if there are no
/// checkpoints or no valid windows.
EvalReport evaluate(const std::vector<Checkpoint>& checkpoints, const Trajectory& traj,
                    std::size_t test_begin, std::size_t test_end, int H,
                    HorizonMetric metric = HorizonMetric::AtHorizon);

/// Persistence MAE of T_r over the same windows as evaluate().
double persistence_mae(const Trajectory& traj, std::size_t test_begin, std::size_t test_end,
                       int depth, int H, HorizonMetric metric = HorizonMetric::AtHorizon);

MetricStats summarize(const std::vector<SeedMetrics>& per_seed, bool want_std);

inline constexpr const char* kEvalCsvHeader =
    "arch,seed,train_days,horizon_steps,mae_Tr,mae_u,mae_Tm,train_seconds";

/// One row per seed, then `mean` and `std` rows. Empty cells for missing values.
std::string eval_rows_csv(const EvalReport& r);
/// A single `persistence,mean` row in the same schema.
std::string persistence_row_csv(int train_days, int H, double mae);

}  // namespace thermonet
