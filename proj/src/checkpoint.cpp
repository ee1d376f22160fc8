#include "thermonet/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "thermonet/text_io.hpp"

namespace thermonet {

namespace {

constexpr const char* kMagic = "thermonet-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::invalid_argument("checkpoint: bad number '" + s + "'");
  }
  return v;
}

void write_widths(std::ostringstream& out, const char* key, const std::vector<int>& widths) {
  out << key;
  for (int w : widths) out << ' ' << w;
  out << '\n';
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::istringstream line(const std::string& expected_key) {
    std::string l;
    while (std::getline(in_, l)) {
      ++line_no_;
      if (!trim(l).empty()) break;
    }
    std::istringstream ls(l);
    std::string key;
    ls >> key;
    if (key != expected_key) {
      throw std::invalid_argument("checkpoint line " + std::to_string(line_no_) + ": expected '" +
                                  expected_key + "', found '" + key + "'");
    }
    return ls;
  }

  std::string raw() {
    std::string l;
    if (!std::getline(in_, l)) throw std::invalid_argument("checkpoint: unexpected end of file");
    ++line_no_;
    return l;
  }

  std::vector<double> numbers(std::size_t count) {
    std::vector<double> v;
    v.reserve(count);
    std::istringstream ls(raw());
    std::string tok;
    while (ls >> tok) v.push_back(unhex(tok));
    if (v.size() != count) {
      throw std::invalid_argument("checkpoint line " + std::to_string(line_no_) + ": expected " +
                                  std::to_string(count) + " values, found " +
                                  std::to_string(v.size()));
    }
    return v;
  }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

std::vector<int> read_widths(std::istringstream ls) {
  std::vector<int> w;
  int x = 0;
  while (ls >> x) w.push_back(x);
  return w;
}

template <typename T>
T read_one(std::istringstream ls) {
  T v{};
  if (!(ls >> v)) throw std::invalid_argument("checkpoint: missing value");
  return v;
}

double read_hex(std::istringstream ls) { return unhex(read_one<std::string>(std::move(ls))); }

}  // namespace

std::string checkpoint_to_text(const Checkpoint& ckpt) {
  if (!ckpt.model) throw std::invalid_argument("checkpoint: no model");
  const ModelSpec& spec = ckpt.model->spec();
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  out << "arch " << to_string(ckpt.architecture()) << '\n';
  out << "depth " << spec.depth << '\n';
  out << "latent_dim " << spec.latent_dim << '\n';
  write_widths(out, "trunk_hidden", spec.trunk_hidden);
  write_widths(out, "encoder_hidden", spec.encoder_hidden);
  write_widths(out, "dynamics_hidden", spec.dynamics_hidden);
  out << "seed " << ckpt.seed << '\n';
  out << "lambda " << hex(ckpt.lambda) << '\n';
  out << "dt_action " << hex(ckpt.dt_action) << '\n';
  out << "u_max " << hex(ckpt.u_max) << '\n';
  out << "train_days " << ckpt.train_days << '\n';
  for (std::size_t i = 0; i < PhysicsParams::kCount; ++i) {
    out << "physics " << PhysicsParams::kNames[i] << ' ' << hex(ckpt.physics.values[i]) << ' '
        << (ckpt.physics.trainable[i] ? 1 : 0) << '\n';
  }
  out << "a12_floor " << hex(ckpt.physics.a12_floor) << '\n';
  const Normalizer& n = ckpt.normalizer;
  out << "normalizer " << n.names.size() << '\n';
  for (std::size_t i = 0; i < n.names.size(); ++i) {
    out << n.names[i] << ' ' << hex(n.mean[i]) << ' ' << hex(n.scale[i]) << '\n';
  }
  const auto nets = ckpt.model->networks();
  out << "networks " << nets.size() << '\n';
  for (const auto& [name, net] : nets) {
    out << "network " << name << ' ' << net->layer_count() << '\n';
    for (std::size_t li = 0; li < net->layer_count(); ++li) {
      const DenseLayer& l = net->layer(li);
      out << "layer " << l.weight.cols() << ' ' << l.weight.rows() << ' ' << to_string(l.activation)
          << '\n';
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) {
        out << (i ? " " : "") << hex(l.weight.data()[i]);
      }
      out << '\n';
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) out << (i ? " " : "") << hex(l.bias[i]);
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

Checkpoint checkpoint_from_text(const std::string& text) {
  Reader r(text);
  if (read_one<int>(r.line(kMagic)) != kVersion) {
    throw std::invalid_argument("checkpoint: unsupported version");
  }
  Checkpoint ckpt;
  const Architecture arch = architecture_from_string(read_one<std::string>(r.line("arch")));
  ModelSpec spec;
  spec.depth = read_one<int>(r.line("depth"));
  spec.latent_dim = read_one<int>(r.line("latent_dim"));
  spec.trunk_hidden = read_widths(r.line("trunk_hidden"));
  spec.encoder_hidden = read_widths(r.line("encoder_hidden"));
  spec.dynamics_hidden = read_widths(r.line("dynamics_hidden"));
  ckpt.seed = read_one<std::uint64_t>(r.line("seed"));
  ckpt.lambda = read_hex(r.line("lambda"));
  ckpt.dt_action = read_hex(r.line("dt_action"));
  ckpt.u_max = read_hex(r.line("u_max"));
  ckpt.train_days = read_one<int>(r.line("train_days"));
  for (std::size_t i = 0; i < PhysicsParams::kCount; ++i) {
    auto ls = r.line("physics");
    std::string name, value;
    int trainable = 0;
    if (!(ls >> name >> value >> trainable) || name != PhysicsParams::kNames[i]) {
      throw std::invalid_argument(std::string("checkpoint: expected physics ") +
                                  PhysicsParams::kNames[i]);
    }
    ckpt.physics.values[i] = unhex(value);
    ckpt.physics.trainable[i] = trainable != 0;
  }
  ckpt.physics.a12_floor = read_hex(r.line("a12_floor"));

  const auto n_norm = read_one<std::size_t>(r.line("normalizer"));
  for (std::size_t i = 0; i < n_norm; ++i) {
    std::istringstream ls(r.raw());
    std::string name, mean, scale;
    if (!(ls >> name >> mean >> scale)) throw std::invalid_argument("checkpoint: bad normalizer row");
    ckpt.normalizer.names.push_back(name);
    ckpt.normalizer.mean.push_back(unhex(mean));
    ckpt.normalizer.scale.push_back(unhex(scale));
  }

  const auto n_nets = read_one<std::size_t>(r.line("networks"));
  std::vector<std::pair<std::string, DenseNet>> nets;
  for (std::size_t ni = 0; ni < n_nets; ++ni) {
    auto ls = r.line("network");
    std::string name;
    std::size_t n_layers = 0;
    if (!(ls >> name >> n_layers)) throw std::invalid_argument("checkpoint: bad network header");
    std::vector<LayerShape> shape;
    std::vector<std::vector<double>> weights, biases;
    for (std::size_t li = 0; li < n_layers; ++li) {
      auto lls = r.line("layer");
      int in = 0, out = 0;
      std::string act;
      if (!(lls >> in >> out >> act) || in <= 0 || out <= 0) {
        throw std::invalid_argument("checkpoint: bad layer header");
      }
      shape.push_back({in, out, activation_from_string(act)});
      weights.push_back(r.numbers(static_cast<std::size_t>(in) * static_cast<std::size_t>(out)));
      biases.push_back(r.numbers(static_cast<std::size_t>(out)));
    }
    DenseNet net(shape);
    for (std::size_t li = 0; li < n_layers; ++li) {
      DenseLayer& l = net.mutable_layer(li);
      std::copy(weights[li].begin(), weights[li].end(), l.weight.data());
      std::copy(biases[li].begin(), biases[li].end(), l.bias.data());
    }
    nets.emplace_back(name, std::move(net));
  }
  r.line("end");

  ckpt.model = assemble_model(arch, spec, std::move(nets));
  if (ckpt.normalizer.names.size() != static_cast<std::size_t>(spec.input_width()) + kTargetCount) {
    throw std::invalid_argument("checkpoint: normalizer width does not match model depth");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file(path, checkpoint_to_text(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_text(read_file(path)); }

}  // namespace thermonet
