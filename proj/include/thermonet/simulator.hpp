#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "thermonet/rc_model.hpp"

namespace thermonet {

inline constexpr double kHoursPerDay = 24.0;
inline constexpr double kDefaultActionInterval = 0.5;  // hours
inline constexpr int kDefaultSubsteps = 30;            // 1-minute Euler steps per action

/// One record per action interval. Temperatures are the values at the
/// interval boundary t_i; u is the demanded power held over [t_i, t_i+1) and
/// u_phys the mean delivered power over the same interval.
struct TrajectoryRow {
  std::int64_t step = 0;
  double time_of_day = 0.0;
  double T_r = 0.0;
  std::optional<double> T_m;  ///< empty for measured data
  double T_a = 0.0;
  double u = 0.0;
  double u_phys = 0.0;

  bool operator==(const TrajectoryRow&) const = default;
};

struct Trajectory {
  double dt_action = kDefaultActionInterval;
  std::vector<TrajectoryRow> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t steps_per_day() const;
  bool has_hidden_state() const;

  /// Rows [begin, end) as a new trajectory (step indices are kept).
  Trajectory slice(std::size_t begin, std::size_t end) const;

  /// Throws std::invalid_argument if steps are not strictly increasing or
  /// time-of-day leaves [0, 24).
  void validate() const;

  bool operator==(const Trajectory&) const = default;
};

/// Diurnal sinusoid plus two stochastic components: fast low-pass noise and a
/// slow multi-day weather drift, both first-order autoregressive per substep.
struct AmbientProfile {
  double mean = 13.0;
  double amplitude = 5.0;        ///< T_a = mean - amplitude * cos(2 pi t / 24) + ...
  double noise_sigma = 0.5;      ///< stationary std of the fast component
  double noise_tau_hours = 1.0 / 3.0;
  double weather_sigma = 3.0;    ///< stationary std of the slow component
  double weather_tau_hours = 72.0;
};

/// Demanded power drawn uniformly from `levels` (fractions of u_max) and held
/// for `hold_steps` action intervals.
struct ActionPolicy {
  std::vector<double> levels{0.0, 0.25, 0.5, 0.75, 1.0};
  int hold_steps = 1;
};

struct SimulationConfig {
  ThermalParams thermal;
  AmbientProfile ambient;
  ActionPolicy policy;
  int n_days = 125;
  std::uint64_t seed = 7;
  double dt_action = kDefaultActionInterval;
  int substeps = kDefaultSubsteps;
  ThermalState initial{17.0, 17.0};

  void validate() const;
};

/// Fine-grained record of every Euler substep; only filled on request.
struct SubstepRecord {
  std::size_t row = 0;
  double T_r = 0.0;
  double T_m = 0.0;
  double T_a = 0.0;
  double u = 0.0;
  double u_phys = 0.0;
};

/// Generates n_days * 24 / dt_action rows. The backup controller is consulted
/// at every substep against the current room temperature. Deterministic for a
/// fixed config.
Trajectory simulate(const SimulationConfig& config,
                    std::vector<SubstepRecord>* trace = nullptr);

}  // namespace thermonet
