#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermonet/checkpoint.hpp"
#include "thermonet/dataset.hpp"
#include "thermonet/models.hpp"
#include "thermonet/physics.hpp"

namespace thermonet {

std::vector<std::uint64_t> default_seeds();  // 1..20

struct TrainConfig {
  Architecture architecture = Architecture::PhysReg;
  ModelSpec model;  ///< carries the depth k
  double lambda = 1.0;
  int epochs = 75;
  int batch_size = 2048;
  double learning_rate = 1e-3;
  std::vector<std::uint64_t> seeds = default_seeds();
  int train_days = 120;
  /// When false the physics coefficients stay at their initial values.
  bool train_physics = true;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LossBreakdown> history;  ///< per epoch, sample-weighted batch means
  std::int64_t optimizer_steps = 0;
  int clamp_events = 0;  ///< steps after which a12 was pushed back to its floor
  double seconds = 0.0;
};

/// Minibatch Adam over the linked samples of `train` on the composite loss.
/// Model weights and trainable physics coefficients share one optimizer.
/// Throws DivergenceError on a non-finite loss or gradient.
TrainResult train_one(const TrainConfig& cfg, std::uint64_t seed, const Dataset& train,
                      const PhysicsParams& initial_physics, double u_max);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<TrainResult> result;
  std::string error;  ///< set when the seed diverged
};

/// Trains every configured seed; `jobs` worker threads pull seeds from a
/// shared queue. A diverged seed is reported in its outcome and the rest
/// keep running. Outcomes follow cfg.seeds order.
std::vector<SeedOutcome> train_ensemble(const TrainConfig& cfg, const Dataset& train,
                                        const PhysicsParams& initial_physics, double u_max,
                                        int jobs = 1);

}  // namespace thermonet
