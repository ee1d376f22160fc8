#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "thermonet/errors.hpp"

namespace thermonet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators over a flat parameter vector.
struct OptimizerState {
  AdamConfig config;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;

  OptimizerState() = default;
  OptimizerState(std::size_t parameter_count, AdamConfig cfg);
};

/// Bias-corrected adaptive-moment update. Throws DivergenceError if any
/// gradient entry is non-finite (parameters are left untouched).
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               OptimizerState& state);

}  // namespace thermonet
