#include "thermonet/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace thermonet {

std::size_t Trajectory::steps_per_day() const {
  return static_cast<std::size_t>(std::lround(kHoursPerDay / dt_action));
}

bool Trajectory::has_hidden_state() const {
  if (rows.empty()) return false;
  for (const auto& r : rows) {
    if (!r.T_m) return false;
  }
  return true;
}

Trajectory Trajectory::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows.size()) {
    throw std::out_of_range("Trajectory::slice: range outside trajectory");
  }
  Trajectory out;
  out.dt_action = dt_action;
  out.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                  rows.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void Trajectory::validate() const {
  if (!(dt_action > 0.0)) throw std::invalid_argument("Trajectory: dt_action must be > 0");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && r.step <= rows[i - 1].step) {
      throw std::invalid_argument("Trajectory: step index not strictly increasing at row " +
                                  std::to_string(i));
    }
    if (!(r.time_of_day >= 0.0 && r.time_of_day < kHoursPerDay)) {
      throw std::invalid_argument("Trajectory: time_of_day outside [0, 24) at row " +
                                  std::to_string(i));
    }
  }
}

void SimulationConfig::validate() const {
  thermal.validate();
  if (n_days < 1) throw std::invalid_argument("SimulationConfig: n_days must be >= 1");
  if (!(dt_action > 0.0)) throw std::invalid_argument("SimulationConfig: dt_action must be > 0");
  const double per_day = kHoursPerDay / dt_action;
  if (std::abs(per_day - std::round(per_day)) > 1e-9) {
    throw std::invalid_argument("SimulationConfig: dt_action must divide 24 hours");
  }
  if (substeps < 1) throw std::invalid_argument("SimulationConfig: substeps must be >= 1");
  if (policy.levels.empty()) throw std::invalid_argument("ActionPolicy: no levels");
  for (double l : policy.levels) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw std::invalid_argument("ActionPolicy: levels must be fractions of u_max in [0, 1]");
    }
  }
  if (policy.hold_steps < 1) throw std::invalid_argument("ActionPolicy: hold_steps must be >= 1");
  if (ambient.noise_sigma < 0.0 || ambient.weather_sigma < 0.0) {
    throw std::invalid_argument("AmbientProfile: sigmas must be >= 0");
  }
  if (!(ambient.noise_tau_hours > 0.0) || !(ambient.weather_tau_hours > 0.0)) {
    throw std::invalid_argument("AmbientProfile: time constants must be > 0");
  }
}

namespace {

// First-order autoregressive process with a prescribed stationary std.
class Ar1 {
 public:
  Ar1(double sigma, double tau_hours, double dt_hours)
      : rho_(std::exp(-dt_hours / tau_hours)), innovation_(sigma * std::sqrt(1.0 - rho_ * rho_)) {}

  double value() const { return value_; }

  void advance(std::mt19937_64& rng) {
    value_ = rho_ * value_ + innovation_ * normal_(rng);
  }

 private:
  double rho_;
  double innovation_;
  double value_ = 0.0;
  std::normal_distribution<double> normal_;
};

}  // namespace

Trajectory simulate(const SimulationConfig& config, std::vector<SubstepRecord>* trace) {
  config.validate();
  const ThermalParams& p = config.thermal;
  const AmbientProfile& amb = config.ambient;

  // Independent streams so the weather does not depend on the action draws.
  std::seed_seq weather_seq{config.seed, std::uint64_t{0xA3B1E7}};
  std::seed_seq action_seq{config.seed, std::uint64_t{0x5C0F1D}};
  std::mt19937_64 weather_rng(weather_seq);
  std::mt19937_64 action_rng(action_seq);
  std::uniform_int_distribution<std::size_t> pick(0, config.policy.levels.size() - 1);

  const double dt_sub = config.dt_action / config.substeps;
  Ar1 noise(amb.noise_sigma, amb.noise_tau_hours, dt_sub);
  Ar1 weather(amb.weather_sigma, amb.weather_tau_hours, dt_sub);

  const auto steps_per_day = static_cast<std::size_t>(std::lround(kHoursPerDay / config.dt_action));
  const std::size_t n_rows = steps_per_day * static_cast<std::size_t>(config.n_days);

  Trajectory traj;
  traj.dt_action = config.dt_action;
  traj.rows.reserve(n_rows);
  if (trace) {
    trace->clear();
    trace->reserve(n_rows * static_cast<std::size_t>(config.substeps));
  }

  auto ambient_at = [&](double t_hours) {
    return amb.mean - amb.amplitude * std::cos(2.0 * std::numbers::pi * t_hours / kHoursPerDay) +
           noise.value() + weather.value();
  };

  ThermalState state = config.initial;
  double u_demanded = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (i % static_cast<std::size_t>(config.policy.hold_steps) == 0) {
      u_demanded = config.policy.levels[pick(action_rng)] * p.u_max;
    }
    const double t_start = static_cast<double>(i) * config.dt_action;

    TrajectoryRow row;
    row.step = static_cast<std::int64_t>(i);
    row.time_of_day = static_cast<double>(i % steps_per_day) * config.dt_action;
    row.T_r = state.T_r;
    row.T_m = state.T_m;
    row.T_a = ambient_at(t_start);
    row.u = u_demanded;

    double power_sum = 0.0;
    for (int s = 0; s < config.substeps; ++s) {
      const double t = t_start + s * dt_sub;
      const ExogenousInputs exo{ambient_at(t), 0.0, 0.0};
      const double u_phys = backup_controller(state.T_r, u_demanded, p);
      if (trace) trace->push_back({i, state.T_r, state.T_m, exo.T_a, u_demanded, u_phys});
      power_sum += u_phys;
      state = euler_substep(state, p, u_phys, exo, dt_sub);
      noise.advance(weather_rng);
      weather.advance(weather_rng);
    }
    row.u_phys = power_sum / config.substeps;
    traj.rows.push_back(row);
  }
  return traj;
}

}  // namespace thermonet
