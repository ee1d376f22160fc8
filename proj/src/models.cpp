#include "thermonet/models.hpp"

#include <random>
#include <stdexcept>

namespace thermonet {

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::PhysNet:
      return "physnet";
    case Architecture::PhysReg:
      return "physreg";
    case Architecture::Mlp:
      return "mlp";
  }
  return "unknown";
}

Architecture architecture_from_string(const std::string& tag) {
  if (tag == "physnet") return Architecture::PhysNet;
  if (tag == "physreg") return Architecture::PhysReg;
  if (tag == "mlp") return Architecture::Mlp;
  throw std::invalid_argument("unknown architecture '" + tag + "' (expected physnet|physreg|mlp)");
}

namespace {

std::vector<LayerShape> trunk_shape(int in, const std::vector<int>& hidden) {
  if (hidden.empty()) throw std::invalid_argument("ModelSpec: trunk needs at least one hidden layer");
  std::vector<LayerShape> s;
  int prev = in;
  for (int h : hidden) {
    s.push_back({prev, h, Activation::Tanh});
    prev = h;
  }
  return s;
}

void validate(const ModelSpec& spec) {
  if (spec.depth < 0) throw std::invalid_argument("ModelSpec: depth must be >= 0");
  if (spec.latent_dim < 1) throw std::invalid_argument("ModelSpec: latent_dim must be >= 1");
}

void expect_shape(const DenseNet& net, int in, int out, const char* name) {
  if (net.input_width() != in || net.output_width() != out) {
    throw std::invalid_argument(std::string("model: sub-network '") + name +
                                "' has incompatible width");
  }
}

}  // namespace

std::size_t ThermalModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, net] : networks()) n += net->parameter_count();
  return n;
}

Eigen::VectorXd ThermalModel::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  std::size_t o = 0;
  for (const auto& [name, net] : networks()) {
    const std::size_t n = net->parameter_count();
    net->write_parameters(std::span<double>(flat.data() + o, n));
    o += n;
  }
  return flat;
}

void ThermalModel::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("ThermalModel::set_parameters: size mismatch");
  }
  std::size_t o = 0;
  for (DenseNet* net : mutable_networks()) {
    const std::size_t n = net->parameter_count();
    net->read_parameters(std::span<const double>(flat.data() + o, n));
    o += n;
  }
}

void ThermalModel::check_input(const Eigen::MatrixXd& x) const {
  if (x.rows() != spec_.input_width()) {
    throw std::invalid_argument("model input has " + std::to_string(x.rows()) +
                                " features, expected " + std::to_string(spec_.input_width()));
  }
}

namespace {

// Concatenates per-network gradients in networks() order.
Eigen::VectorXd flatten(const std::vector<std::pair<const DenseNet*, const BackwardResult*>>& parts) {
  std::size_t total = 0;
  for (const auto& [net, g] : parts) total += net->parameter_count();
  Eigen::VectorXd flat(static_cast<Eigen::Index>(total));
  std::size_t o = 0;
  for (const auto& [net, g] : parts) {
    const std::size_t n = net->parameter_count();
    DenseNet::write_gradient(*g, std::span<double>(flat.data() + o, n));
    o += n;
  }
  return flat;
}

}  // namespace

// ---------------------------------------------------------------- PhysNet

PhysNet::PhysNet(ModelSpec spec, std::uint64_t seed) : ThermalModel(std::move(spec)) {
  validate(spec_);
  std::mt19937_64 rng(seed);
  encoder_ = DenseNet::init(mlp_shape(2 * spec_.depth, spec_.encoder_hidden, spec_.latent_dim), rng);
  dynamics_ = DenseNet::init(
      mlp_shape(spec_.latent_dim + ModelSpec::kCurrentWidth, spec_.dynamics_hidden, 2), rng);
}

PhysNet::PhysNet(ModelSpec spec, DenseNet encoder, DenseNet dynamics)
    : ThermalModel(std::move(spec)), encoder_(std::move(encoder)), dynamics_(std::move(dynamics)) {
  validate(spec_);
  expect_shape(encoder_, 2 * spec_.depth, spec_.latent_dim, "encoder");
  expect_shape(dynamics_, spec_.latent_dim + ModelSpec::kCurrentWidth, 2, "dynamics");
}

ModelForward PhysNet::forward(const Eigen::MatrixXd& x) const {
  check_input(x);
  const Eigen::Index hist = 2 * spec_.depth;
  const Eigen::Index L = spec_.latent_dim;
  ModelForward f;
  f.caches.push_back(encoder_.forward(x.topRows(hist)));
  const Eigen::MatrixXd& latent = f.caches[0].output();
  Eigen::MatrixXd dyn_in(L + ModelSpec::kCurrentWidth, x.cols());
  dyn_in.topRows(L) = latent;
  dyn_in.bottomRows(ModelSpec::kCurrentWidth) = x.bottomRows(ModelSpec::kCurrentWidth);
  f.caches.push_back(dynamics_.forward(dyn_in));
  f.output.resize(2 + L, x.cols());
  f.output.topRows(2) = f.caches[1].output();
  f.output.bottomRows(L) = latent;
  return f;
}

Eigen::VectorXd PhysNet::backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const {
  const Eigen::Index L = spec_.latent_dim;
  if (d_output.rows() != 2 + L || d_output.cols() != fwd.output.cols()) {
    throw std::invalid_argument("PhysNet::backward: gradient shape mismatch");
  }
  const BackwardResult g_dyn = dynamics_.backward(fwd.caches.at(1), d_output.topRows(2));
  const Eigen::MatrixXd d_latent = g_dyn.input_gradient.topRows(L) + d_output.bottomRows(L);
  const BackwardResult g_enc = encoder_.backward(fwd.caches.at(0), d_latent);
  return flatten({{&encoder_, &g_enc}, {&dynamics_, &g_dyn}});
}

std::vector<std::pair<std::string, const DenseNet*>> PhysNet::networks() const {
  return {{"encoder", &encoder_}, {"dynamics", &dynamics_}};
}

std::vector<DenseNet*> PhysNet::mutable_networks() { return {&encoder_, &dynamics_}; }

std::unique_ptr<ThermalModel> PhysNet::clone() const { return std::make_unique<PhysNet>(*this); }

// ---------------------------------------------------------------- PhysReg

PhysRegMlp::PhysRegMlp(ModelSpec spec, std::uint64_t seed) : ThermalModel(std::move(spec)) {
  validate(spec_);
  std::mt19937_64 rng(seed);
  const int width = spec_.trunk_hidden.back();
  // Order matters: BaselineMlp draws trunk then observable head from the same stream.
  trunk_ = DenseNet::init(trunk_shape(spec_.input_width(), spec_.trunk_hidden), rng);
  observable_head_ = DenseNet::init({{width, 2, Activation::Identity}}, rng);
  latent_head_ = DenseNet::init({{width, spec_.latent_dim, Activation::Identity}}, rng);
}

PhysRegMlp::PhysRegMlp(ModelSpec spec, DenseNet trunk, DenseNet observable_head,
                       DenseNet latent_head)
    : ThermalModel(std::move(spec)),
      trunk_(std::move(trunk)),
      observable_head_(std::move(observable_head)),
      latent_head_(std::move(latent_head)) {
  validate(spec_);
  expect_shape(trunk_, spec_.input_width(), spec_.trunk_hidden.back(), "trunk");
  expect_shape(observable_head_, spec_.trunk_hidden.back(), 2, "observable_head");
  expect_shape(latent_head_, spec_.trunk_hidden.back(), spec_.latent_dim, "latent_head");
}

Eigen::MatrixXd PhysRegMlp::heads(const Eigen::MatrixXd& trunk_features) const {
  Eigen::MatrixXd out(2 + spec_.latent_dim, trunk_features.cols());
  out.topRows(2) = observable_head_.predict(trunk_features);
  out.bottomRows(spec_.latent_dim) = latent_head_.predict(trunk_features);
  return out;
}

ModelForward PhysRegMlp::forward(const Eigen::MatrixXd& x) const {
  check_input(x);
  ModelForward f;
  f.caches.push_back(trunk_.forward(x));
  f.caches.push_back(observable_head_.forward(f.caches[0].output()));
  f.caches.push_back(latent_head_.forward(f.caches[0].output()));
  f.output.resize(2 + spec_.latent_dim, x.cols());
  f.output.topRows(2) = f.caches[1].output();
  f.output.bottomRows(spec_.latent_dim) = f.caches[2].output();
  return f;
}

Eigen::VectorXd PhysRegMlp::backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const {
  const Eigen::Index L = spec_.latent_dim;
  if (d_output.rows() != 2 + L || d_output.cols() != fwd.output.cols()) {
    throw std::invalid_argument("PhysRegMlp::backward: gradient shape mismatch");
  }
  const BackwardResult g_obs = observable_head_.backward(fwd.caches.at(1), d_output.topRows(2));
  const BackwardResult g_lat = latent_head_.backward(fwd.caches.at(2), d_output.bottomRows(L));
  const BackwardResult g_trunk =
      trunk_.backward(fwd.caches.at(0), g_obs.input_gradient + g_lat.input_gradient);
  return flatten({{&trunk_, &g_trunk}, {&observable_head_, &g_obs}, {&latent_head_, &g_lat}});
}

std::vector<std::pair<std::string, const DenseNet*>> PhysRegMlp::networks() const {
  return {{"trunk", &trunk_}, {"observable_head", &observable_head_}, {"latent_head", &latent_head_}};
}

std::vector<DenseNet*> PhysRegMlp::mutable_networks() {
  return {&trunk_, &observable_head_, &latent_head_};
}

std::unique_ptr<ThermalModel> PhysRegMlp::clone() const { return std::make_unique<PhysRegMlp>(*this); }

// ---------------------------------------------------------------- MLP

BaselineMlp::BaselineMlp(ModelSpec spec, std::uint64_t seed) : ThermalModel(std::move(spec)) {
  validate(spec_);
  std::mt19937_64 rng(seed);
  trunk_ = DenseNet::init(trunk_shape(spec_.input_width(), spec_.trunk_hidden), rng);
  observable_head_ = DenseNet::init({{spec_.trunk_hidden.back(), 2, Activation::Identity}}, rng);
}

BaselineMlp::BaselineMlp(ModelSpec spec, DenseNet trunk, DenseNet observable_head)
    : ThermalModel(std::move(spec)), trunk_(std::move(trunk)), observable_head_(std::move(observable_head)) {
  validate(spec_);
  expect_shape(trunk_, spec_.input_width(), spec_.trunk_hidden.back(), "trunk");
  expect_shape(observable_head_, spec_.trunk_hidden.back(), 2, "observable_head");
}

ModelForward BaselineMlp::forward(const Eigen::MatrixXd& x) const {
  check_input(x);
  ModelForward f;
  f.caches.push_back(trunk_.forward(x));
  f.caches.push_back(observable_head_.forward(f.caches[0].output()));
  f.output = f.caches[1].output();
  return f;
}

Eigen::VectorXd BaselineMlp::backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const {
  if (d_output.rows() != 2 || d_output.cols() != fwd.output.cols()) {
    throw std::invalid_argument("BaselineMlp::backward: gradient shape mismatch");
  }
  const BackwardResult g_obs = observable_head_.backward(fwd.caches.at(1), d_output);
  const BackwardResult g_trunk = trunk_.backward(fwd.caches.at(0), g_obs.input_gradient);
  return flatten({{&trunk_, &g_trunk}, {&observable_head_, &g_obs}});
}

std::vector<std::pair<std::string, const DenseNet*>> BaselineMlp::networks() const {
  return {{"trunk", &trunk_}, {"observable_head", &observable_head_}};
}

std::vector<DenseNet*> BaselineMlp::mutable_networks() { return {&trunk_, &observable_head_}; }

std::unique_ptr<ThermalModel> BaselineMlp::clone() const { return std::make_unique<BaselineMlp>(*this); }

// ---------------------------------------------------------------- factories

std::unique_ptr<ThermalModel> make_model(Architecture arch, const ModelSpec& spec,
                                         std::uint64_t seed) {
  switch (arch) {
    case Architecture::PhysNet:
      return std::make_unique<PhysNet>(spec, seed);
    case Architecture::PhysReg:
      return std::make_unique<PhysRegMlp>(spec, seed);
    case Architecture::Mlp:
      return std::make_unique<BaselineMlp>(spec, seed);
  }
  throw std::invalid_argument("make_model: unknown architecture");
}

std::unique_ptr<ThermalModel> assemble_model(
    Architecture arch, const ModelSpec& spec,
    std::vector<std::pair<std::string, DenseNet>> networks) {
  auto take = [&](const std::string& name) -> DenseNet {
    for (auto& [n, net] : networks) {
      if (n == name) return std::move(net);
    }
    throw std::invalid_argument("assemble_model: missing sub-network '" + name + "'");
  };
  switch (arch) {
    case Architecture::PhysNet:
      return std::make_unique<PhysNet>(spec, take("encoder"), take("dynamics"));
    case Architecture::PhysReg:
      return std::make_unique<PhysRegMlp>(spec, take("trunk"), take("observable_head"),
                                          take("latent_head"));
    case Architecture::Mlp:
      return std::make_unique<BaselineMlp>(spec, take("trunk"), take("observable_head"));
  }
  throw std::invalid_argument("assemble_model: unknown architecture");
}

}  // namespace thermonet
