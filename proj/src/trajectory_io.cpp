#include "thermonet/trajectory_io.hpp"

#include <stdexcept>

#include "thermonet/text_io.hpp"

namespace thermonet {

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out;
  out.reserve(64 * (traj.size() + 1));
  out.append(kTrajectoryCsvHeader);
  out.push_back('\n');
  for (const auto& r : traj.rows) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.time_of_day);
    out += ',';
    out += format_double(r.T_r);
    out += ',';
    if (r.T_m) out += format_double(*r.T_m);
    out += ',';
    out += format_double(r.T_a);
    out += ',';
    out += format_double(r.u);
    out += ',';
    out += format_double(r.u_phys);
    out += '\n';
  }
  return out;
}

Trajectory trajectory_from_csv(std::string_view text, double dt_action) {
  Trajectory traj;
  traj.dt_action = dt_action;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != kTrajectoryCsvHeader) {
        throw std::invalid_argument("trajectory CSV: expected header '" +
                                    std::string(kTrajectoryCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw std::invalid_argument("trajectory CSV line " + std::to_string(line_no) +
                                  ": expected 7 fields, got " + std::to_string(f.size()));
    }
    try {
      TrajectoryRow r;
      r.step = parse_int(f[0]);
      r.time_of_day = parse_double(f[1]);
      r.T_r = parse_double(f[2]);
      if (!trim(f[3]).empty()) r.T_m = parse_double(f[3]);
      r.T_a = parse_double(f[4]);
      r.u = parse_double(f[5]);
      r.u_phys = parse_double(f[6]);
      traj.rows.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("trajectory CSV line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
    if (end == text.size()) break;
  }
  if (!header_seen) throw std::invalid_argument("trajectory CSV: empty input");
  traj.validate();
  return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  write_file(path, trajectory_to_csv(traj));
}

Trajectory read_trajectory_csv(const std::string& path, double dt_action) {
  return trajectory_from_csv(read_file(path), dt_action);
}

}  // namespace thermonet
