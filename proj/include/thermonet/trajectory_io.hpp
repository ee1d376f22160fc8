#pragma once

#include <string>
#include <string_view>

#include "thermonet/simulator.hpp"

namespace thermonet {

/// Header of the trajectory CSV. The T_m field may be empty for measured data.
inline constexpr std::string_view kTrajectoryCsvHeader = "step,time_of_day,T_r,T_m,T_a,u,u_phys";

std::string trajectory_to_csv(const Trajectory& traj);

/// Parses the CSV produced by trajectory_to_csv (or external data in the same
/// layout). Throws std::invalid_argument with the offending line number.
Trajectory trajectory_from_csv(std::string_view text, double dt_action = kDefaultActionInterval);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path, double dt_action = kDefaultActionInterval);

}  // namespace thermonet
