#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermonet/dataset.hpp"
#include "thermonet/rc_model.hpp"

namespace thermonet {

/// Discrete-time physics coefficients of the room-temperature equation
///   dT_r/dt = -a11 T_r + a12 T_m + b u + c13 T_a
/// plus the (unused by the loss) mass-row couplings a21, a22.
struct PhysicsParams {
  static constexpr std::size_t kCount = 6;
  static constexpr std::array<const char*, kCount> kNames{"a11", "a12", "a21", "a22", "b", "c13"};

  std::array<double, kCount> values{};
  std::array<bool, kCount> trainable{true, true, false, false, true, true};
  double a12_floor = 1e-4;

  double a11() const { return values[0]; }
  double a12() const { return values[1]; }
  double a21() const { return values[2]; }
  double a22() const { return values[3]; }
  double b() const { return values[4]; }
  double c13() const { return values[5]; }

  /// a12 with its magnitude held at or above a12_floor.
  double effective_a12() const;
  bool a12_below_floor() const;

  std::size_t trainable_count() const;
  void write_trainables(std::span<double> out) const;
  void read_trainables(std::span<const double> in);
  /// Pushes a12 back to the floor after an optimizer step; returns true if it moved.
  bool project();

  bool operator==(const PhysicsParams&) const = default;
};

/// Coefficients implied by the 2R2C constants.
PhysicsParams params_from_rc(const ThermalParams& tp);

struct HiddenStateTarget {
  double value = 0.0;
  bool clamped = false;  ///< a12 was below the floor and was clamped
};

/// Thermal-mass temperature implied by the room equation:
///   ((T_r_next - T_r_i)/dt + a11 * T_r_hat_i - b * u_phys_hat_i - c13 * T_a_i) / a12
HiddenStateTarget hidden_state_target(double T_r_i, double T_r_next, double T_r_hat_i,
                                      double u_phys_hat_i, double T_a_i, const PhysicsParams& pp,
                                      double dt);

/// Measured quantities of a batch, with each sample's predecessor resolved.
struct PhysicsBatch {
  std::vector<std::size_t> positions;
  std::vector<std::size_t> paired_positions;  ///< sample for row index-1
  Eigen::RowVectorXd T_r;       ///< T_r,i (degC)
  Eigen::RowVectorXd T_r_next;  ///< T_r,i+1 (degC)
  Eigen::RowVectorXd T_a;       ///< T_a,i (degC)
  Eigen::MatrixXd targets;      ///< normalized (T_r,i+1, u_phys,i), 2 x batch
  double dt = 0.5;
};

/// Throws std::invalid_argument if any position lacks a pair link.
PhysicsBatch make_physics_batch(const Dataset& ds, std::span<const std::size_t> positions);

/// Affine maps from normalized network outputs to physical units. The latent
/// shares the room-temperature map, so its decoded value is in degC.
struct OutputScaling {
  double T_mean = 0.0;
  double T_scale = 1.0;
  double u_mean = 0.0;
  double u_scale = 1.0;

  static OutputScaling from(const Normalizer& n);
};

/// Rows of a model output block.
inline constexpr Eigen::Index kRowTemp = 0;
inline constexpr Eigen::Index kRowPower = 1;
inline constexpr Eigen::Index kRowLatent = 2;

struct LossBreakdown {
  double L_reg = 0.0;
  double L_phys = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

struct LossResult {
  LossBreakdown breakdown;
  Eigen::MatrixXd d_output;          ///< same shape as the current output block
  Eigen::RowVectorXd d_paired_temp;  ///< w.r.t. row kRowTemp of the paired output
  Eigen::VectorXd d_physics;         ///< over PhysicsParams trainables
  int clamped = 0;
};

/// L_reg + lambda * L_phys over a batch.
///
/// `output` holds the normalized predictions for the batch samples (2 rows,
/// plus latent rows; only the first latent enters the physics term). `paired_temp` is the normalized T_r prediction made
/// from each sample's predecessor; required whenever the output has a latent
/// row. L_phys compares the decoded latent with the hidden-state target, and
/// its gradient flows into the latent, both predictions inside the target,
/// and the trainable physics coefficients.
LossResult composite_loss(const Eigen::MatrixXd& output, const Eigen::RowVectorXd* paired_temp,
                          const PhysicsBatch& batch, const PhysicsParams& pp, double lambda,
                          const OutputScaling& scaling);

}  // namespace thermonet
