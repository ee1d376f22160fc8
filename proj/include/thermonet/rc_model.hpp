#pragma once

// Continuous-time 2R2C single-zone model and the comfort backup controller.

namespace thermonet {

/// Lumped RC constants of the building. Units: K/kW, kWh/K, kW, degC.
struct ThermalParams {
  double R_ra = 5.0;  ///< room <-> ambient resistance
  double R_rm = 1.0;  ///< room <-> thermal mass resistance
  double C_r = 2.0;   ///< room air capacitance
  double C_m = 8.0;   ///< thermal mass capacitance
  double alpha = 0.0; ///< share of solar gain entering the room node
  double beta = 0.0;  ///< share of internal gain entering the room node
  double b_gain = 0.5;  ///< effect of heater power on dT_r/dt (K per kWh)
  double T_r_min = 16.0;
  double T_r_max = 22.0;
  double u_max = 2.0;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

struct ThermalState {
  double T_r = 17.0;
  double T_m = 17.0;
};

struct ExogenousInputs {
  double T_a = 0.0;  ///< ambient temperature
  double G = 0.0;    ///< solar irradiance (kW), carried but zero in simulation
  double I_g = 0.0;  ///< internal heat gains (kW), carried but zero in simulation
};

/// Time derivatives in K/h.
struct StateDerivative {
  double dT_r = 0.0;
  double dT_m = 0.0;
};

/// Right-hand side of the 2R2C state equations.
/// Throws std::invalid_argument on non-finite input.
StateDerivative derivatives(const ThermalState& state, const ThermalParams& params,
                            double u_phys, const ExogenousInputs& exo);

/// Power actually delivered after the comfort override. Band edges are
/// inclusive: at exactly T_r_min or T_r_max the demanded power passes through.
double backup_controller(double T_r, double u_demanded, const ThermalParams& params);

/// One explicit Euler step of length dt_sub hours.
ThermalState euler_substep(const ThermalState& state, const ThermalParams& params,
                           double u_phys, const ExogenousInputs& exo, double dt_sub);

}  // namespace thermonet
