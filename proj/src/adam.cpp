#include "thermonet/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace thermonet {

OptimizerState::OptimizerState(std::size_t parameter_count, AdamConfig cfg)
    : config(cfg),
      first_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))),
      second_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))) {}

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!grads.allFinite()) throw DivergenceError("adam_step: non-finite gradient");

  const AdamConfig& c = state.config;
  ++state.step;
  state.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * grads;
  state.second_moment = c.beta2 * state.second_moment + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  params.array() -= c.learning_rate * (state.first_moment.array() / correction1) /
                    ((state.second_moment.array() / correction2).sqrt() + c.epsilon);
}

}  // namespace thermonet
