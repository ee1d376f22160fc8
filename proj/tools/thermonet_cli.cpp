// thermonet: simulate 2R2C data, train the three thermal models, evaluate
// checkpoints, and run the validation / data-size / horizon experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermonet/checkpoint.hpp"
#include "thermonet/experiments.hpp"
#include "thermonet/forecast.hpp"
#include "thermonet/run_config.hpp"
#include "thermonet/runtime.hpp"
#include "thermonet/simulator.hpp"
#include "thermonet/text_io.hpp"
#include "thermonet/trajectory_io.hpp"

#ifndef THERMONET_VERSION
#define THERMONET_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace thermonet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Flags shared by all subcommands. Named flags are shorthands for config keys
// and are applied after --config and --set, in that order.
struct CommonFlags {
  std::vector<std::string> config_files;
  std::vector<std::string> sets;
  std::map<std::string, std::string> named;  // config key -> raw value
  std::optional<std::string> arch;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_files, "key = value config file (repeatable)");
  cmd->add_option("--set", f.sets, "override one setting, KEY=VALUE (repeatable)");
  auto key = [&](const std::string& flag, const std::string& k, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&f, k](const std::string& v) { f.named[k] = v; }, help);
  };
  key("--data", "paths.data_dir", "directory holding train.csv / test.csv");
  key("-o,--out", "paths.output_dir", "output directory (under $THERMONET_OUTPUT_ROOT if set)");
  key("--days", "sim.days", "simulated days");
  key("--seed", "sim.seed", "simulation seed");
  key("--R_ra", "thermal.R_ra", "room-ambient resistance");
  key("--R_rm", "thermal.R_rm", "room-mass resistance");
  key("--C_r", "thermal.C_r", "room capacitance");
  key("--C_m", "thermal.C_m", "mass capacitance");
  key("--b_gain", "thermal.b_gain", "heater gain");
  key("--u_max", "thermal.u_max", "maximum heater power");
  key("--seeds", "train.seeds", "training seeds, e.g. 1-20 or 1,3,5");
  key("--lambda", "train.lambda", "physics loss weight");
  key("--epochs", "train.epochs", "training epochs");
  key("--batch-size", "train.batch_size", "minibatch size");
  key("--depth", "train.depth", "history depth k");
  key("--train-days", "train.train_days", "training span in days");
  key("--test-days", "experiment.test_days", "held-out days at the end of the trajectory");
  key("-j,--jobs", "experiment.jobs", "parallel training workers");
  key("--metric", "experiment.metric", "at-horizon | path-average");
  cmd->add_option("--arch", f.arch, "architectures: physnet, physreg, mlp, all, or a list");
  cmd->add_flag_function(
      "--timing", [&f](std::int64_t) { f.named["experiment.record_timing"] = "true"; },
      "fill train_seconds in result CSVs");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg;
  for (const auto& path : f.config_files) {
    std::string text;
    try {
      text = read_file(path);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    apply_settings(cfg, parse_config_text(text));
  }
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
    apply_setting(cfg, std::string(trim(s.substr(0, eq))), s.substr(eq + 1));
  }
  for (const auto& [k, v] : f.named) apply_setting(cfg, k, v);
  if (f.arch) apply_setting(cfg, "experiment.architectures", *f.arch == "all" ? "mlp,physreg,physnet" : *f.arch);
  cfg.validate();
  return cfg;
}

// simulate, train and evaluate default to the data directory so their outputs
// chain; experiments default to paths.output_dir.
fs::path out_dir(const RunConfig& cfg, bool data_default = false) {
  const bool unset = cfg.output_dir == RunConfig{}.output_dir;
  const fs::path p(data_default && unset ? cfg.data_dir : cfg.output_dir);
  const std::string root = output_root("");
  return p.is_absolute() || root.empty() ? p : fs::path(root) / p;
}

void log_line(const std::string& m) { std::cerr << "[thermonet] " << m << std::endl; }

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg) {
  std::string text = "# thermonet " THERMONET_VERSION "\n# command = " + command + "\n";
  text += run_config_to_text(cfg);
  write_file((dir / "manifest.txt").string(), text);
}

Trajectory simulate_checked(const RunConfig& cfg) {
  Trajectory traj = simulate(cfg.simulation);
  const std::size_t test_rows = static_cast<std::size_t>(cfg.experiment.test_days) * traj.steps_per_day();
  if (test_rows >= traj.size()) {
    throw ConfigError("sim.days must exceed experiment.test_days");
  }
  return traj;
}

void write_split(const fs::path& dir, const Trajectory& traj, int test_days) {
  const std::size_t cut = traj.size() - static_cast<std::size_t>(test_days) * traj.steps_per_day();
  write_trajectory_csv((dir / "train.csv").string(), traj.slice(0, cut));
  write_trajectory_csv((dir / "test.csv").string(), traj.slice(cut, traj.size()));
}

Trajectory concat(Trajectory a, const Trajectory& b) {
  a.rows.insert(a.rows.end(), b.rows.begin(), b.rows.end());
  a.validate();
  return a;
}

int cmd_simulate(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const Trajectory traj = simulate_checked(cfg);
  const fs::path dir = out_dir(cfg, true);
  write_split(dir, traj, cfg.experiment.test_days);
  write_manifest(dir, "simulate", cfg);
  log_line("wrote " + std::to_string(traj.size()) + " rows to " + dir.string());
  return kExitOk;
}

Trajectory read_split(const RunConfig& cfg, bool need_train, bool need_test) {
  const fs::path data(cfg.data_dir);
  Trajectory out;
  out.dt_action = cfg.simulation.dt_action;
  if (need_train) out = read_trajectory_csv((data / "train.csv").string(), cfg.simulation.dt_action);
  if (need_test) {
    Trajectory t = read_trajectory_csv((data / "test.csv").string(), cfg.simulation.dt_action);
    out = need_train ? concat(std::move(out), t) : std::move(t);
  }
  return out;
}

std::string checkpoint_name(Architecture a, std::uint64_t seed) {
  return to_string(a) + "_seed" + std::to_string(seed) + ".ckpt";
}

int cmd_train(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const Trajectory train_traj = read_split(cfg, true, false);
  const std::size_t per_day = train_traj.steps_per_day();
  const auto want = static_cast<std::size_t>(cfg.train.train_days) * per_day;
  if (want > train_traj.size()) {
    throw std::runtime_error("train.csv holds " + std::to_string(train_traj.size() / per_day) +
                             " days, fewer than train.train_days = " +
                             std::to_string(cfg.train.train_days));
  }
  Dataset ds = build_samples(train_traj, cfg.train.model.depth, train_traj.size() - want,
                             train_traj.size());
  ds.normalizer = fit_normalizer(ds);

  const fs::path dir = out_dir(cfg, true);
  fs::create_directories(dir / "checkpoints");
  write_file((dir / "normalizer.csv").string(), normalizer_to_text(*ds.normalizer));

  std::vector<Ensemble> ensembles;
  std::size_t ok = 0, total = 0;
  for (Architecture a : cfg.experiment.architectures) {
    TrainConfig tc = cfg.train;
    tc.architecture = a;
    if (a == Architecture::Mlp) tc.lambda = 0.0;
    log_line("training " + to_string(a) + ", lambda " + format_double(tc.lambda) + ", " +
             std::to_string(tc.seeds.size()) + " seeds");
    const auto outcomes = train_ensemble(tc, ds, params_from_rc(cfg.simulation.thermal),
                                         cfg.simulation.thermal.u_max, cfg.experiment.jobs);
    Ensemble e;
    e.architecture = a;
    e.train_days = cfg.train.train_days;
    e.lambda = tc.lambda;
    for (const auto& o : outcomes) {
      ++total;
      TrainSummary s;
      s.seed = o.seed;
      if (o.result) {
        ++ok;
        s.final_loss = o.result->history.back();
        s.optimizer_steps = o.result->optimizer_steps;
        s.clamp_events = o.result->clamp_events;
        s.seconds = o.result->seconds;
        s.physics = o.result->checkpoint.physics;
        save_checkpoint((dir / "checkpoints" / checkpoint_name(a, o.seed)).string(),
                        o.result->checkpoint);
      } else {
        s.error = o.error;
        log_line("seed " + std::to_string(o.seed) + " diverged: " + o.error);
      }
      e.runs.push_back(s);
    }
    ensembles.push_back(std::move(e));
  }
  write_file((dir / "training_report.csv").string(), training_report_csv(ensembles));
  write_file((dir / "timings.csv").string(), timings_csv(ensembles));
  write_manifest(dir, "train", cfg);
  log_line("wrote " + std::to_string(ok) + "/" + std::to_string(total) + " checkpoints to " +
           (dir / "checkpoints").string());
  return ok == 0 ? kExitRuntime : kExitOk;
}

int cmd_evaluate(const CommonFlags& f, int horizon, const std::string& ckpt_dir) {
  const RunConfig cfg = resolve(f);
  if (horizon < 1) throw ConfigError("--horizon must be >= 1");
  const Trajectory test = read_split(cfg, false, true);
  const fs::path cdir(ckpt_dir.empty() ? (fs::path(cfg.data_dir) / "checkpoints").string() : ckpt_dir);

  std::string csv = std::string(kEvalCsvHeader) + "\n";
  for (Architecture a : cfg.experiment.architectures) {
    std::vector<Checkpoint> cks;
    std::vector<std::uint64_t> missing;
    for (std::uint64_t seed : cfg.train.seeds) {
      const fs::path p = cdir / checkpoint_name(a, seed);
      if (fs::exists(p)) {
        cks.push_back(load_checkpoint(p.string()));
      } else {
        missing.push_back(seed);
      }
    }
    if (!missing.empty()) {
      std::string seeds;
      for (auto s : missing) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
      throw std::runtime_error("missing " + to_string(a) + " checkpoints in " + cdir.string() +
                               " for seeds " + seeds + "; run: thermonet train --arch " +
                               to_string(a) + " --seeds " + seeds + " --data " + cfg.data_dir +
                               " --out " + cdir.parent_path().string());
    }
    const EvalReport r = evaluate(cks, test, 0, test.size(), horizon, cfg.experiment.metric);
    csv += eval_rows_csv(r);
  }
  csv += persistence_row_csv(cfg.train.train_days, horizon,
                             persistence_mae(test, 0, test.size(), cfg.train.model.depth, horizon,
                                             cfg.experiment.metric));
  const fs::path dir = out_dir(cfg, true);
  write_file((dir / ("evaluation_H" + std::to_string(horizon) + ".csv")).string(), csv);
  write_manifest(dir, "evaluate", cfg);
  std::cout << csv;
  return kExitOk;
}

// Uses train.csv + test.csv from the data directory, or simulates and writes
// them there when both are absent.
Trajectory experiment_data(const RunConfig& cfg) {
  const fs::path data(cfg.data_dir);
  const bool have_train = fs::exists(data / "train.csv");
  const bool have_test = fs::exists(data / "test.csv");
  if (have_train && have_test) return read_split(cfg, true, true);
  if (have_train != have_test) {
    throw std::runtime_error(data.string() + " holds only one of train.csv / test.csv");
  }
  const Trajectory traj = simulate_checked(cfg);
  write_split(data, traj, cfg.experiment.test_days);
  write_manifest(data, "simulate", cfg);
  log_line("simulated " + std::to_string(traj.size()) + " rows into " + data.string());
  return traj;
}

int cmd_experiment(const CommonFlags& f, const std::string& which) {
  const RunConfig cfg = resolve(f);
  ExperimentRunner runner(cfg, experiment_data(cfg), log_line);
  const fs::path dir = out_dir(cfg);
  fs::create_directories(dir);
  if (which == "validation") {
    write_validation(dir.string(), run_validation(runner), cfg);
  } else if (which == "size-sweep") {
    write_sweep(dir.string(), "size_sweep", run_size_sweep(runner), cfg, true);
    write_file((dir / "lambda_tuning.csv").string(), lambda_trials_csv(runner.lambda_trials()));
  } else {
    write_sweep(dir.string(), "horizon_sweep", run_horizon_sweep(runner), cfg, false);
    write_file((dir / "lambda_tuning.csv").string(), lambda_trials_csv(runner.lambda_trials()));
  }
  write_manifest(dir, "experiment " + which, cfg);
  log_line("results in " + dir.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"thermonet: physics-informed thermal models on simulated 2R2C building data"};
  app.set_version_flag("--version", THERMONET_VERSION);
  app.require_subcommand(1);

  CommonFlags sim_f, train_f, eval_f, exp_f;
  auto* sim = app.add_subcommand("simulate", "generate train.csv, test.csv and a manifest");
  add_common(sim, sim_f);
  auto* train = app.add_subcommand("train", "train seeded checkpoints per architecture");
  add_common(train, train_f);
  auto* eval = app.add_subcommand("evaluate", "score checkpoints on test.csv");
  add_common(eval, eval_f);
  int horizon = 1;
  std::string ckpt_dir;
  eval->add_option("-H,--horizon", horizon, "forecast horizon in steps");
  eval->add_option("--checkpoints", ckpt_dir, "checkpoint directory (default <data>/checkpoints)");
  auto* exp = app.add_subcommand("experiment", "validation, size-sweep or horizon-sweep");
  add_common(exp, exp_f);
  std::string which;
  exp->add_option("which", which, "validation | size-sweep | horizon-sweep")
      ->required()
      ->check(CLI::IsMember({"validation", "size-sweep", "horizon-sweep"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_f);
    if (train->parsed()) return cmd_train(train_f);
    if (eval->parsed()) return cmd_evaluate(eval_f, horizon, ckpt_dir);
    return cmd_experiment(exp_f, which);
  } catch (const ConfigError& e) {
    std::cerr << "thermonet: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "thermonet: " << e.what() << '\n';
    return kExitRuntime;
  }
}
