#include "thermonet/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "thermonet/adam.hpp"
#include "thermonet/errors.hpp"

namespace thermonet {

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> s(20);
  std::iota(s.begin(), s.end(), std::uint64_t{1});
  return s;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("TrainConfig: lambda must be finite and >= 0");
  }
  if (seeds.empty()) throw std::invalid_argument("TrainConfig: seed list is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("TrainConfig: seeds must be distinct");
  }
  if (model.depth < 0) throw std::invalid_argument("TrainConfig: depth must be >= 0");
  if (model.latent_dim < 1) throw std::invalid_argument("TrainConfig: latent_dim must be >= 1");
  if (train_days < 1) throw std::invalid_argument("TrainConfig: train_days must be >= 1");
}

namespace {

std::vector<Eigen::Index> as_index(std::span<const std::size_t> p) {
  return {p.begin(), p.end()};
}

}  // namespace

TrainResult train_one(const TrainConfig& cfg, std::uint64_t seed, const Dataset& train,
                      const PhysicsParams& initial_physics, double u_max) {
  cfg.validate();
  if (!train.normalizer) throw std::invalid_argument("train_one: dataset has no normalizer");
  if (train.depth != cfg.model.depth) {
    throw std::invalid_argument("train_one: dataset depth " + std::to_string(train.depth) +
                                " does not match model depth " +
                                std::to_string(cfg.model.depth));
  }
  std::vector<std::size_t> order = train.linked_positions();
  if (order.empty()) throw std::invalid_argument("train_one: no linked training samples");

  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<ThermalModel> model = make_model(cfg.architecture, cfg.model, seed);
  PhysicsParams pp = initial_physics;
  if (!cfg.train_physics) pp.trainable.fill(false);
  const OutputScaling scaling = OutputScaling::from(*train.normalizer);

  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Eigen::MatrixXd X = train.feature_matrix(all);

  const auto n_model = static_cast<Eigen::Index>(model->parameter_count());
  const auto n_phys = static_cast<Eigen::Index>(pp.trainable_count());
  Eigen::VectorXd params(n_model + n_phys);
  params.head(n_model) = model->parameters();
  pp.write_trainables({params.data() + n_model, static_cast<std::size_t>(n_phys)});
  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  OptimizerState opt(static_cast<std::size_t>(params.size()), adam);

  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   0x5EEDu};
  std::mt19937_64 shuffle_rng(sq);

  TrainResult res;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown sum;
    sum.lambda = cfg.lambda;
    for (std::size_t off = 0; off < order.size(); off += batch) {
      const std::span<const std::size_t> pos(order.data() + off,
                                             std::min(batch, order.size() - off));
      const PhysicsBatch pb = make_physics_batch(train, pos);
      const Eigen::MatrixXd xb = X(Eigen::all, as_index(pos));
      const ModelForward fwd = model->forward(xb);

      std::optional<ModelForward> prev;
      Eigen::RowVectorXd paired;
      if (model->has_latent()) {
        prev = model->forward(X(Eigen::all, as_index(pb.paired_positions)));
        paired = prev->output.row(kRowTemp);
      }
      const LossResult lr = composite_loss(fwd.output, prev ? &paired : nullptr, pb, pp,
                                           cfg.lambda, scaling);
      if (!std::isfinite(lr.breakdown.total)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", seed " +
                              std::to_string(seed) + " (L_reg " +
                              std::to_string(lr.breakdown.L_reg) + ", L_phys " +
                              std::to_string(lr.breakdown.L_phys) + ")");
      }

      Eigen::VectorXd grad(params.size());
      grad.head(n_model) = model->backward(fwd, lr.d_output);
      if (prev && cfg.lambda > 0.0) {
        Eigen::MatrixXd d_prev = Eigen::MatrixXd::Zero(prev->output.rows(), prev->output.cols());
        d_prev.row(kRowTemp) = lr.d_paired_temp;
        grad.head(n_model) += model->backward(*prev, d_prev);
      }
      grad.tail(n_phys) = lr.d_physics;

      adam_step(params, grad, opt);
      model->set_parameters(params.head(n_model));
      pp.read_trainables({params.data() + n_model, static_cast<std::size_t>(n_phys)});
      if (pp.project()) {
        pp.write_trainables({params.data() + n_model, static_cast<std::size_t>(n_phys)});
        ++res.clamp_events;
      }
      ++res.optimizer_steps;

      const double w = static_cast<double>(pos.size());
      sum.L_reg += w * lr.breakdown.L_reg;
      sum.L_phys += w * lr.breakdown.L_phys;
      sum.total += w * lr.breakdown.total;
    }
    const double n = static_cast<double>(order.size());
    sum.L_reg /= n;
    sum.L_phys /= n;
    sum.total /= n;
    res.history.push_back(sum);
  }

  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.checkpoint.model = std::move(model);
  res.checkpoint.physics = pp;
  res.checkpoint.normalizer = *train.normalizer;
  res.checkpoint.seed = seed;
  res.checkpoint.lambda = cfg.lambda;
  res.checkpoint.dt_action = train.dt_action;
  res.checkpoint.u_max = u_max;
  res.checkpoint.train_days = cfg.train_days;
  return res;
}

std::vector<SeedOutcome> train_ensemble(const TrainConfig& cfg, const Dataset& train,
                                        const PhysicsParams& initial_physics, double u_max,
                                        int jobs) {
  cfg.validate();
  std::vector<SeedOutcome> out(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(out.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      out[i].seed = cfg.seeds[i];
      try {
        out[i].result = train_one(cfg, cfg.seeds[i], train, initial_physics, u_max);
      } catch (const DivergenceError& e) {
        out[i].error = e.what();
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(out.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

}  // namespace thermonet
