#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thermonet/dense_net.hpp"

namespace thermonet {

enum class Architecture { PhysNet, PhysReg, Mlp };

std::string to_string(Architecture a);
/// Accepts the tags `physnet`, `physreg`, `mlp`.
Architecture architecture_from_string(const std::string& tag);

/// Layer widths of the three architectures. Defaults follow the tuned
/// hyperparameters: PhysReg/MLP trunk 2x64, PhysNet encoder 2x24 and
/// dynamics 1x128, all tanh.
struct ModelSpec {
  int depth = 8;
  int latent_dim = 1;
  std::vector<int> trunk_hidden{64, 64};
  std::vector<int> encoder_hidden{24, 24};
  std::vector<int> dynamics_hidden{128};

  int input_width() const { return 2 * depth + 6; }
  /// Width of the non-history part of the input: x_obs (2), u (1), w (3).
  static constexpr int kCurrentWidth = 6;

  bool operator==(const ModelSpec&) const = default;
};

/// Forward intermediates; `output` rows are (T_r,i+1, u_phys,i, latent...),
/// all in normalized units.
struct ModelForward {
  std::vector<ForwardCache> caches;
  Eigen::MatrixXd output;
};

class ThermalModel {
 public:
  virtual ~ThermalModel() = default;

  virtual Architecture architecture() const = 0;
  virtual bool has_latent() const = 0;
  const ModelSpec& spec() const { return spec_; }
  Eigen::Index output_rows() const { return has_latent() ? 2 + spec_.latent_dim : 2; }

  /// x: normalized features, (2k + 6) x batch.
  virtual ModelForward forward(const Eigen::MatrixXd& x) const = 0;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const { return forward(x).output; }

  /// Flat parameter gradient of sum(d_output .* output).
  virtual Eigen::VectorXd backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const = 0;

  /// Named sub-networks in flat-parameter order.
  virtual std::vector<std::pair<std::string, const DenseNet*>> networks() const = 0;
  virtual std::vector<DenseNet*> mutable_networks() = 0;
  virtual std::unique_ptr<ThermalModel> clone() const = 0;

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

 protected:
  explicit ThermalModel(ModelSpec spec) : spec_(std::move(spec)) {}
  void check_input(const Eigen::MatrixXd& x) const;

  ModelSpec spec_;
};

/// Encoder g over the history window to the latent, dynamics h over
/// (latent, x_obs, u, w). History reaches the predictions only via the latent.
class PhysNet final : public ThermalModel {
 public:
  PhysNet(ModelSpec spec, std::uint64_t seed);
  PhysNet(ModelSpec spec, DenseNet encoder, DenseNet dynamics);

  Architecture architecture() const override { return Architecture::PhysNet; }
  bool has_latent() const override { return true; }
  ModelForward forward(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const override;
  std::vector<std::pair<std::string, const DenseNet*>> networks() const override;
  std::vector<DenseNet*> mutable_networks() override;
  std::unique_ptr<ThermalModel> clone() const override;

  const DenseNet& encoder() const { return encoder_; }
  const DenseNet& dynamics() const { return dynamics_; }
  DenseNet& mutable_encoder() { return encoder_; }

 private:
  DenseNet encoder_;
  DenseNet dynamics_;
};

/// Shared tanh trunk s(x) with two affine heads: observables h1 s + h2 and
/// latent g1 s + g2. The latent does not feed the observable head.
class PhysRegMlp final : public ThermalModel {
 public:
  PhysRegMlp(ModelSpec spec, std::uint64_t seed);
  PhysRegMlp(ModelSpec spec, DenseNet trunk, DenseNet observable_head, DenseNet latent_head);

  Architecture architecture() const override { return Architecture::PhysReg; }
  bool has_latent() const override { return true; }
  ModelForward forward(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const override;
  std::vector<std::pair<std::string, const DenseNet*>> networks() const override;
  std::vector<DenseNet*> mutable_networks() override;
  std::unique_ptr<ThermalModel> clone() const override;

  const DenseNet& trunk() const { return trunk_; }
  const DenseNet& observable_head() const { return observable_head_; }
  const DenseNet& latent_head() const { return latent_head_; }

  /// Applies both heads to precomputed trunk features (hidden x batch).
  Eigen::MatrixXd heads(const Eigen::MatrixXd& trunk_features) const;

 private:
  DenseNet trunk_;
  DenseNet observable_head_;
  DenseNet latent_head_;
};

/// Trunk and observable head of PhysRegMlp without a latent. With the same
/// seed the initial weights equal the PhysReg trunk and observable head.
class BaselineMlp final : public ThermalModel {
 public:
  BaselineMlp(ModelSpec spec, std::uint64_t seed);
  BaselineMlp(ModelSpec spec, DenseNet trunk, DenseNet observable_head);

  Architecture architecture() const override { return Architecture::Mlp; }
  bool has_latent() const override { return false; }
  ModelForward forward(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backward(const ModelForward& fwd, const Eigen::MatrixXd& d_output) const override;
  std::vector<std::pair<std::string, const DenseNet*>> networks() const override;
  std::vector<DenseNet*> mutable_networks() override;
  std::unique_ptr<ThermalModel> clone() const override;

  const DenseNet& trunk() const { return trunk_; }
  const DenseNet& observable_head() const { return observable_head_; }

 private:
  DenseNet trunk_;
  DenseNet observable_head_;
};

std::unique_ptr<ThermalModel> make_model(Architecture arch, const ModelSpec& spec,
                                         std::uint64_t seed);

/// Rebuilds a model from named sub-networks (checkpoint loading).
std::unique_ptr<ThermalModel> assemble_model(
    Architecture arch, const ModelSpec& spec,
    std::vector<std::pair<std::string, DenseNet>> networks);

}  // namespace thermonet
