#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "thermonet/dataset.hpp"
#include "thermonet/models.hpp"
#include "thermonet/physics.hpp"

namespace thermonet {

/// A trained model with everything needed to run it on raw trajectory data.
struct Checkpoint {
  std::shared_ptr<const ThermalModel> model;
  PhysicsParams physics;
  Normalizer normalizer;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double dt_action = 0.5;
  double u_max = 2.0;  ///< rollout clamp for predicted power
  int train_days = 0;

  Architecture architecture() const { return model->architecture(); }
  int depth() const { return model->spec().depth; }
};

/// Plain-text layout, one token group per line, floats as C99 hexfloats:
///
///   thermonet-checkpoint 1
///   arch <physnet|physreg|mlp>
///   depth <k>            latent_dim <n>
///   trunk_hidden <w...>  encoder_hidden <w...>  dynamics_hidden <w...>
///   seed <s>  lambda <x>  dt_action <x>  u_max <x>  train_days <d>
///   physics <name> <value> <trainable 0|1>     (six lines)
///   a12_floor <x>
///   normalizer <n>       then n lines: <name> <mean> <scale>
///   networks <n>         then per network:
///     network <name> <layers>
///     layer <in> <out> <activation>
///     <weights, column-major>
///     <biases>
///   end
std::string checkpoint_to_text(const Checkpoint& ckpt);
Checkpoint checkpoint_from_text(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace thermonet
