#include "thermonet/run_config.hpp"

#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "thermonet/text_io.hpp"

namespace thermonet {

namespace {

double to_double(const std::string& v) { return parse_double(trim(v)); }

int to_int(const std::string& v) { return static_cast<int>(parse_int(trim(v))); }

bool to_bool(const std::string& v) {
  const std::string t(trim(v));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + t + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F parse) {
  std::vector<T> out;
  for (const auto& f : split_fields(trim(v), ',')) {
    if (!trim(f).empty()) out.push_back(parse(std::string(trim(f))));
  }
  return out;
}

template <typename T, typename F>
std::string from_list(const std::vector<T>& v, F fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string fmt_int(int v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

std::string fmt_seeds(const std::vector<std::uint64_t>& s) {
  return from_list(s, [](std::uint64_t x) { return std::to_string(x); });
}

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define TN_DOUBLE(KEY, FIELD)                                                    \
  Entry {                                                                        \
    KEY, [](const RunConfig& c) { return format_double(c.FIELD); },              \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_double(v); }       \
  }
#define TN_INT(KEY, FIELD)                                                       \
  Entry {                                                                        \
    KEY, [](const RunConfig& c) { return fmt_int(c.FIELD); },                    \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_int(v); }          \
  }
#define TN_BOOL(KEY, FIELD)                                                      \
  Entry {                                                                        \
    KEY, [](const RunConfig& c) { return fmt_bool(c.FIELD); },                   \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_bool(v); }         \
  }
#define TN_INTS(KEY, FIELD)                                                      \
  Entry {                                                                        \
    KEY, [](const RunConfig& c) { return from_list(c.FIELD, fmt_int); },         \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_list<int>(v, to_int); } \
  }
#define TN_DOUBLES(KEY, FIELD)                                                   \
  Entry {                                                                        \
    KEY, [](const RunConfig& c) { return from_list(c.FIELD, format_double); },   \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_list<double>(v, to_double); } \
  }

double fixed_lambda_or_blank(const RunConfig& c, Architecture a, bool& present) {
  const auto it = c.experiment.fixed_lambda.find(a);
  present = it != c.experiment.fixed_lambda.end();
  return present ? it->second : 0.0;
}

Entry fixed_lambda_entry(const char* key, Architecture a) {
  return {key,
          [a](const RunConfig& c) {
            bool present = false;
            const double v = fixed_lambda_or_blank(c, a, present);
            return present ? format_double(v) : std::string();
          },
          [a](RunConfig& c, const std::string& v) {
            if (trim(v).empty()) {
              c.experiment.fixed_lambda.erase(a);
            } else {
              c.experiment.fixed_lambda[a] = to_double(v);
            }
          }};
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      TN_DOUBLE("thermal.R_ra", simulation.thermal.R_ra),
      TN_DOUBLE("thermal.R_rm", simulation.thermal.R_rm),
      TN_DOUBLE("thermal.C_r", simulation.thermal.C_r),
      TN_DOUBLE("thermal.C_m", simulation.thermal.C_m),
      TN_DOUBLE("thermal.alpha", simulation.thermal.alpha),
      TN_DOUBLE("thermal.beta", simulation.thermal.beta),
      TN_DOUBLE("thermal.b_gain", simulation.thermal.b_gain),
      TN_DOUBLE("thermal.T_r_min", simulation.thermal.T_r_min),
      TN_DOUBLE("thermal.T_r_max", simulation.thermal.T_r_max),
      TN_DOUBLE("thermal.u_max", simulation.thermal.u_max),
      TN_DOUBLE("ambient.mean", simulation.ambient.mean),
      TN_DOUBLE("ambient.amplitude", simulation.ambient.amplitude),
      TN_DOUBLE("ambient.noise_sigma", simulation.ambient.noise_sigma),
      TN_DOUBLE("ambient.noise_tau_hours", simulation.ambient.noise_tau_hours),
      TN_DOUBLE("ambient.weather_sigma", simulation.ambient.weather_sigma),
      TN_DOUBLE("ambient.weather_tau_hours", simulation.ambient.weather_tau_hours),
      TN_DOUBLES("policy.levels", simulation.policy.levels),
      TN_INT("policy.hold_steps", simulation.policy.hold_steps),
      TN_INT("sim.days", simulation.n_days),
      Entry{"sim.seed", [](const RunConfig& c) { return std::to_string(c.simulation.seed); },
            [](RunConfig& c, const std::string& v) {
              const long long s = parse_int(trim(v));
              if (s < 0) throw std::invalid_argument("seed must be >= 0");
              c.simulation.seed = static_cast<std::uint64_t>(s);
            }},
      TN_DOUBLE("sim.dt_action", simulation.dt_action),
      TN_INT("sim.substeps", simulation.substeps),
      TN_DOUBLE("sim.initial_T_r", simulation.initial.T_r),
      TN_DOUBLE("sim.initial_T_m", simulation.initial.T_m),
      TN_INT("train.depth", train.model.depth),
      TN_INT("train.latent_dim", train.model.latent_dim),
      TN_INTS("train.trunk_hidden", train.model.trunk_hidden),
      TN_INTS("train.encoder_hidden", train.model.encoder_hidden),
      TN_INTS("train.dynamics_hidden", train.model.dynamics_hidden),
      TN_DOUBLE("train.lambda", train.lambda),
      TN_INT("train.epochs", train.epochs),
      TN_INT("train.batch_size", train.batch_size),
      TN_DOUBLE("train.learning_rate", train.learning_rate),
      Entry{"train.seeds", [](const RunConfig& c) { return fmt_seeds(c.train.seeds); },
            [](RunConfig& c, const std::string& v) { c.train.seeds = parse_seed_list(v); }},
      TN_INT("train.train_days", train.train_days),
      TN_BOOL("train.train_physics", train.train_physics),
      Entry{"experiment.architectures",
            [](const RunConfig& c) {
              return from_list(c.experiment.architectures,
                               [](Architecture a) { return to_string(a); });
            },
            [](RunConfig& c, const std::string& v) {
              c.experiment.architectures = to_list<Architecture>(
                  v, [](const std::string& s) { return architecture_from_string(s); });
            }},
      TN_INT("experiment.test_days", experiment.test_days),
      TN_INT("experiment.validation_days", experiment.validation_days),
      TN_INT("experiment.validation_train_days", experiment.validation_train_days),
      TN_DOUBLES("experiment.lambda_grid", experiment.lambda_grid),
      Entry{"experiment.tuning_seeds",
            [](const RunConfig& c) { return fmt_seeds(c.experiment.tuning_seeds); },
            [](RunConfig& c, const std::string& v) {
              c.experiment.tuning_seeds =
                  trim(v).empty() ? std::vector<std::uint64_t>{} : parse_seed_list(v);
            }},
      fixed_lambda_entry("experiment.lambda.physreg", Architecture::PhysReg),
      fixed_lambda_entry("experiment.lambda.physnet", Architecture::PhysNet),
      TN_INTS("experiment.sweep_sizes", experiment.sweep_sizes),
      TN_INTS("experiment.sweep_horizons", experiment.sweep_horizons),
      TN_INTS("experiment.horizon_grid", experiment.horizon_grid),
      TN_INTS("experiment.horizon_sizes", experiment.horizon_sizes),
      Entry{"experiment.metric", [](const RunConfig& c) { return to_string(c.experiment.metric); },
            [](RunConfig& c, const std::string& v) {
              c.experiment.metric = horizon_metric_from_string(std::string(trim(v)));
            }},
      TN_INT("experiment.jobs", experiment.jobs),
      TN_BOOL("experiment.record_timing", experiment.record_timing),
      TN_BOOL("experiment.write_svg", experiment.write_svg),
      Entry{"paths.data_dir", [](const RunConfig& c) { return c.data_dir; },
            [](RunConfig& c, const std::string& v) { c.data_dir = std::string(trim(v)); }},
      Entry{"paths.output_dir", [](const RunConfig& c) { return c.output_dir; },
            [](RunConfig& c, const std::string& v) { c.output_dir = std::string(trim(v)); }},
  };
  return entries;
}

#undef TN_DOUBLE
#undef TN_INT
#undef TN_BOOL
#undef TN_INTS
#undef TN_DOUBLES

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void require_positive_list(const std::vector<int>& v, const char* name) {
  require(!v.empty(), std::string(name) + " must not be empty");
  for (int x : v) require(x >= 1, std::string(name) + " entries must be >= 1");
}

}  // namespace

void RunConfig::validate() const {
  try {
    simulation.validate();
    train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ExperimentSettings& x = experiment;
  require(!x.architectures.empty(), "experiment.architectures must not be empty");
  require(std::set<Architecture>(x.architectures.begin(), x.architectures.end()).size() ==
              x.architectures.size(),
          "experiment.architectures must be distinct");
  require(x.test_days >= 1, "experiment.test_days must be >= 1");
  require(x.validation_days >= 1, "experiment.validation_days must be >= 1");
  require(x.validation_train_days > x.validation_days,
          "experiment.validation_train_days must exceed experiment.validation_days");
  require(!x.lambda_grid.empty(), "experiment.lambda_grid must not be empty");
  for (double l : x.lambda_grid) require(l >= 0.0, "experiment.lambda_grid entries must be >= 0");
  for (const auto& [a, l] : x.fixed_lambda) {
    require(l >= 0.0, "experiment.lambda." + to_string(a) + " must be >= 0");
  }
  require(std::set<std::uint64_t>(x.tuning_seeds.begin(), x.tuning_seeds.end()).size() ==
              x.tuning_seeds.size(),
          "experiment.tuning_seeds must be distinct");
  require_positive_list(x.sweep_sizes, "experiment.sweep_sizes");
  require_positive_list(x.sweep_horizons, "experiment.sweep_horizons");
  require_positive_list(x.horizon_grid, "experiment.horizon_grid");
  require_positive_list(x.horizon_sizes, "experiment.horizon_sizes");
  require(x.jobs >= 1, "experiment.jobs must be >= 1");
  require(!output_dir.empty(), "paths.output_dir must not be empty");
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t(trim(line));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(no) + ": expected 'key = value'");
    }
    const std::string key(trim(t.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty key");
    kv.emplace_back(key, std::string(trim(t.substr(eq + 1))));
  }
  return kv;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : registry()) {
    if (key != e.key) continue;
    try {
      e.set(cfg, value);
    } catch (const std::exception& ex) {
      throw ConfigError("invalid value for " + key + ": " + ex.what());
    }
    return;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_settings(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
}

std::string run_config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& e : registry()) out << e.key << " = " << e.get(cfg) << '\n';
  return out.str();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& raw : split_fields(trim(s), ',')) {
    const std::string f(trim(raw));
    if (f.empty()) continue;
    const auto dash = f.find('-', 1);
    if (dash == std::string::npos) {
      const long long v = parse_int(f);
      if (v < 0) throw std::invalid_argument("seeds must be >= 0");
      out.push_back(static_cast<std::uint64_t>(v));
      continue;
    }
    const long long lo = parse_int(trim(f.substr(0, dash)));
    const long long hi = parse_int(trim(f.substr(dash + 1)));
    if (lo < 0 || hi < lo) throw std::invalid_argument("bad seed range '" + f + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

std::string output_root(const std::string& fallback) {
  const char* env = std::getenv("THERMONET_OUTPUT_ROOT");
  return env != nullptr && *env != '\0' ? std::string(env) : fallback;
}

}  // namespace thermonet
