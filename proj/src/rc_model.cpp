#include "thermonet/rc_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace thermonet {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ThermalParams: " + what);
}

}  // namespace

void ThermalParams::validate() const {
  require(std::isfinite(R_ra) && R_ra > 0.0, "R_ra must be > 0");
  require(std::isfinite(R_rm) && R_rm > 0.0, "R_rm must be > 0");
  require(std::isfinite(C_r) && C_r > 0.0, "C_r must be > 0");
  require(std::isfinite(C_m) && C_m > 0.0, "C_m must be > 0");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
  require(std::isfinite(b_gain), "b_gain must be finite");
  require(std::isfinite(T_r_min) && std::isfinite(T_r_max) && T_r_min < T_r_max,
          "comfort band requires T_r_min < T_r_max");
  require(std::isfinite(u_max) && u_max > 0.0, "u_max must be > 0");
}

StateDerivative derivatives(const ThermalState& state, const ThermalParams& params,
                            double u_phys, const ExogenousInputs& exo) {
  if (!std::isfinite(state.T_r) || !std::isfinite(state.T_m) || !std::isfinite(u_phys) ||
      !std::isfinite(exo.T_a) || !std::isfinite(exo.G) || !std::isfinite(exo.I_g)) {
    throw std::invalid_argument("derivatives: non-finite input");
  }
  const double room_ambient = 1.0 / (params.C_r * params.R_ra);
  const double room_mass = 1.0 / (params.C_r * params.R_rm);
  const double mass_room = 1.0 / (params.C_m * params.R_rm);

  StateDerivative d;
  // Written as temperature differences so equal temperatures give exactly zero.
  d.dT_r = room_ambient * (exo.T_a - state.T_r) + room_mass * (state.T_m - state.T_r) +
           params.b_gain * u_phys + (params.alpha / params.C_r) * exo.G +
           (params.beta / params.C_r) * exo.I_g;
  d.dT_m = mass_room * (state.T_r - state.T_m) + ((1.0 - params.alpha) / params.C_m) * exo.G +
           ((1.0 - params.beta) / params.C_m) * exo.I_g;
  return d;
}

double backup_controller(double T_r, double u_demanded, const ThermalParams& params) {
  if (T_r > params.T_r_max) return 0.0;
  if (T_r < params.T_r_min) return params.u_max;
  return u_demanded;
}

ThermalState euler_substep(const ThermalState& state, const ThermalParams& params,
                           double u_phys, const ExogenousInputs& exo, double dt_sub) {
  if (!(dt_sub > 0.0)) throw std::invalid_argument("euler_substep: dt_sub must be > 0");
  const StateDerivative d = derivatives(state, params, u_phys, exo);
  return {state.T_r + dt_sub * d.dT_r, state.T_m + dt_sub * d.dT_m};
}

}  // namespace thermonet
