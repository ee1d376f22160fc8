#include "thermonet/dense_net.hpp"

#include <cmath>
#include <stdexcept>

namespace thermonet {

namespace {

// Vectorizable tanh: sign(x) (1 - e^-2|x|) / (1 + e^-2|x|), with an odd series
// near zero to keep relative accuracy. Agrees with std::tanh to a few ulp.
void tanh_in_place(Eigen::MatrixXd& z) {
  auto a = z.array();
  const Eigen::ArrayXXd ax = a.abs();
  const Eigen::ArrayXXd e = (-2.0 * ax.min(40.0)).exp();
  const Eigen::ArrayXXd big = (1.0 - e) / (1.0 + e);
  const Eigen::ArrayXXd x2 = a.square();
  const Eigen::ArrayXXd small = a * (1.0 + x2 * (-1.0 / 3.0 + x2 * (2.0 / 15.0 + x2 * (-17.0 / 315.0))));
  a = (ax < 1e-2).select(small, a.sign() * big);
}

}  // namespace

std::string to_string(Activation a) {
  return a == Activation::Tanh ? "tanh" : "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::vector<LayerShape> mlp_shape(int in, std::span<const int> hidden, int out) {
  std::vector<LayerShape> shape;
  int prev = in;
  for (int h : hidden) {
    shape.push_back({prev, h, Activation::Tanh});
    prev = h;
  }
  shape.push_back({prev, out, Activation::Identity});
  return shape;
}

DenseNet::DenseNet(std::vector<LayerShape> shape) {
  for (const auto& s : shape) {
    if (s.in < 0 || s.out < 1) throw std::invalid_argument("DenseNet: invalid layer shape");
    layers_.push_back({Eigen::MatrixXd::Zero(s.out, s.in), Eigen::VectorXd::Zero(s.out),
                       s.activation});
  }
  check_shape();
}

DenseNet DenseNet::init(const std::vector<LayerShape>& shape, std::mt19937_64& rng) {
  DenseNet net(shape);
  for (auto& layer : net.layers_) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan), std::sqrt(6.0 / fan));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
    }
  }
  return net;
}

DenseNet DenseNet::init(const std::vector<LayerShape>& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init(shape, rng);
}

void DenseNet::check_shape() const {
  if (layers_.empty()) throw std::invalid_argument("DenseNet: no layers");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
      throw std::invalid_argument("DenseNet: layer " + std::to_string(i) +
                                  " input width does not match previous output");
    }
  }
}

DenseLayer& DenseNet::mutable_layer(std::size_t i) {
  ++version_;
  return layers_.at(i);
}

std::vector<LayerShape> DenseNet::shape() const {
  std::vector<LayerShape> s;
  for (const auto& l : layers_) {
    s.push_back({static_cast<int>(l.weight.cols()), static_cast<int>(l.weight.rows()),
                 l.activation});
  }
  return s;
}

int DenseNet::input_width() const { return static_cast<int>(layers_.front().weight.cols()); }
int DenseNet::output_width() const { return static_cast<int>(layers_.back().weight.rows()); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void DenseNet::write_parameters(std::span<double> out) const {
  if (out.size() != parameter_count()) throw std::invalid_argument("DenseNet: parameter span size");
  std::size_t o = 0;
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) out[o++] = l.weight.data()[i];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out[o++] = l.bias[i];
  }
}

void DenseNet::read_parameters(std::span<const double> in) {
  if (in.size() != parameter_count()) throw std::invalid_argument("DenseNet: parameter span size");
  ++version_;
  std::size_t o = 0;
  for (auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = in[o++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = in[o++];
  }
}

void DenseNet::write_gradient(const BackwardResult& g, std::span<double> out) {
  std::size_t o = 0;
  for (const auto& l : g.layers) {
    if (o + static_cast<std::size_t>(l.weight.size() + l.bias.size()) > out.size()) {
      throw std::invalid_argument("DenseNet: gradient span too small");
    }
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) out[o++] = l.weight.data()[i];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out[o++] = l.bias[i];
  }
  if (o != out.size()) throw std::invalid_argument("DenseNet: gradient span size");
}

ForwardCache DenseNet::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_width()) {
    throw std::invalid_argument("DenseNet::forward: input has " + std::to_string(x.rows()) +
                                " rows, network expects " + std::to_string(input_width()));
  }
  ForwardCache cache;
  cache.net = this;
  cache.net_version = version_;
  cache.inputs.reserve(layers_.size());
  cache.activations.reserve(layers_.size());
  const Eigen::MatrixXd* current = &x;
  for (const auto& l : layers_) {
    cache.inputs.push_back(*current);
    Eigen::MatrixXd z = l.weight * (*current);
    z.colwise() += l.bias;
    if (l.activation == Activation::Tanh) tanh_in_place(z);
    cache.activations.push_back(std::move(z));
    current = &cache.activations.back();
  }
  return cache;
}

Eigen::MatrixXd DenseNet::predict(const Eigen::MatrixXd& x) const { return forward(x).output(); }

BackwardResult DenseNet::backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream) const {
  if (cache.net != this || cache.net_version != version_) {
    throw std::logic_error("DenseNet::backward: stale forward cache");
  }
  const Eigen::MatrixXd& y = cache.output();
  if (upstream.rows() != y.rows() || upstream.cols() != y.cols()) {
    throw std::invalid_argument("DenseNet::backward: upstream gradient shape mismatch");
  }
  BackwardResult result;
  result.layers.resize(layers_.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    if (l.activation == Activation::Tanh) {
      delta.array() *= 1.0 - cache.activations[li].array().square();
    }
    result.layers[li].weight = delta * cache.inputs[li].transpose();
    result.layers[li].bias = delta.rowwise().sum();
    delta = l.weight.transpose() * delta;
  }
  result.input_gradient = std::move(delta);
  return result;
}

}  // namespace thermonet
