#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thermonet {

enum class Activation { Tanh, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerShape {
  int in = 0;
  int out = 0;
  Activation activation = Activation::Tanh;

  bool operator==(const LayerShape&) const = default;
};

/// Hidden widths with tanh, then an identity output layer.
std::vector<LayerShape> mlp_shape(int in, std::span<const int> hidden, int out);

struct DenseLayer {
  Eigen::MatrixXd weight;  ///< out x in
  Eigen::VectorXd bias;    ///< out
  Activation activation = Activation::Tanh;
};

/// Intermediates of one forward call; samples are columns.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;      ///< input to each layer
  std::vector<Eigen::MatrixXd> activations; ///< output of each layer
  std::uint64_t net_version = 0;
  const void* net = nullptr;

  const Eigen::MatrixXd& output() const { return activations.back(); }
};

struct LayerGradient {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct BackwardResult {
  std::vector<LayerGradient> layers;
  Eigen::MatrixXd input_gradient;  ///< in x batch
};

/// Fully connected feed-forward network. Any mutable access to parameters
/// bumps an internal version so caches from earlier forward calls are rejected.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<LayerShape> shape);

  /// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)), biases zero.
  static DenseNet init(const std::vector<LayerShape>& shape, std::mt19937_64& rng);
  static DenseNet init(const std::vector<LayerShape>& shape, std::uint64_t seed);

  std::size_t layer_count() const { return layers_.size(); }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  DenseLayer& mutable_layer(std::size_t i);
  std::vector<LayerShape> shape() const;
  int input_width() const;
  int output_width() const;

  std::size_t parameter_count() const;
  /// Flat layout: per layer, weight (column-major) then bias.
  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);
  static void write_gradient(const BackwardResult& g, std::span<double> out);

  /// x: in x batch. Throws std::invalid_argument on width mismatch.
  ForwardCache forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

  /// Gradients of sum(upstream .* output) w.r.t. parameters and input.
  /// Throws std::logic_error if the cache came from another net or an older
  /// parameter version.
  BackwardResult backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream) const;

 private:
  void check_shape() const;

  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

}  // namespace thermonet
