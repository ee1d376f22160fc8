#include "thermonet/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "thermonet/physics.hpp"
#include "thermonet/svg_chart.hpp"
#include "thermonet/text_io.hpp"

namespace thermonet {

ExperimentRunner::ExperimentRunner(RunConfig cfg, Trajectory traj, LogFn log)
    : cfg_(std::move(cfg)), traj_(std::move(traj)), log_(std::move(log)) {
  cfg_.validate();
  traj_.validate();
  if (traj_.size() <= static_cast<std::size_t>(cfg_.experiment.test_days) * traj_.steps_per_day()) {
    throw ConfigError("trajectory holds " + std::to_string(traj_.size() / traj_.steps_per_day()) +
                      " days, not more than experiment.test_days");
  }
}

void ExperimentRunner::require_days(int train_days, const char* what) const {
  const std::size_t days = traj_.size() / traj_.steps_per_day();
  if (static_cast<std::size_t>(train_days + cfg_.experiment.test_days) > days) {
    throw ConfigError("trajectory holds " + std::to_string(days) + " days; " + what + " needs " +
                      std::to_string(train_days) + " training + " +
                      std::to_string(cfg_.experiment.test_days) + " test days");
  }
}

PhysicsParams ExperimentRunner::initial_physics() const {
  return params_from_rc(cfg_.simulation.thermal);
}

std::size_t ExperimentRunner::test_begin() const {
  return traj_.size() - static_cast<std::size_t>(cfg_.experiment.test_days) * traj_.steps_per_day();
}

const Dataset& ExperimentRunner::training_set(int train_days) {
  auto it = train_sets_.find(train_days);
  if (it == train_sets_.end()) {
    require_days(train_days, "the training size");
    DatasetSplit sp = split(traj_, train_days, cfg_.experiment.test_days, cfg_.train.model.depth);
    it = train_sets_.emplace(train_days, std::move(sp.train)).first;
  }
  return it->second;
}

const Ensemble& ExperimentRunner::train_cached(Architecture a, int train_days, double lambda,
                                               const Dataset& data,
                                               const std::vector<std::uint64_t>& seeds,
                                               bool tuning) {
  const auto key = std::make_tuple(a, train_days, lambda, tuning);
  if (auto it = ensembles_.find(key); it != ensembles_.end()) return it->second;

  TrainConfig tc = cfg_.train;
  tc.architecture = a;
  tc.lambda = lambda;
  tc.train_days = train_days;
  tc.seeds = seeds;
  if (log_) {
    std::ostringstream m;
    m << (tuning ? "tuning " : "training ") << to_string(a) << " on " << train_days
      << " days, lambda " << format_double(lambda) << ", " << seeds.size() << " seeds";
    log_(m.str());
  }
  const auto outcomes =
      train_ensemble(tc, data, initial_physics(), cfg_.simulation.thermal.u_max, cfg_.experiment.jobs);
  Ensemble e;
  e.architecture = a;
  e.train_days = train_days;
  e.lambda = lambda;
  for (const auto& o : outcomes) {
    TrainSummary s;
    s.seed = o.seed;
    if (o.result) {
      s.final_loss = o.result->history.back();
      s.optimizer_steps = o.result->optimizer_steps;
      s.clamp_events = o.result->clamp_events;
      s.seconds = o.result->seconds;
      s.physics = o.result->checkpoint.physics;
      e.checkpoints.push_back(o.result->checkpoint);
    } else {
      s.error = o.error;
      if (log_) log_("  seed " + std::to_string(o.seed) + " diverged: " + o.error);
    }
    e.runs.push_back(s);
  }
  if (e.checkpoints.empty()) {
    throw std::runtime_error("every seed diverged for " + to_string(a) + " on " +
                             std::to_string(train_days) + " days");
  }
  return ensembles_.emplace(key, std::move(e)).first->second;
}

double ExperimentRunner::lambda_for(Architecture a) {
  if (a == Architecture::Mlp) return 0.0;
  if (auto f = cfg_.experiment.fixed_lambda.find(a); f != cfg_.experiment.fixed_lambda.end()) {
    return f->second;
  }
  if (auto t = tuned_.find(a); t != tuned_.end()) return t->second;

  const ExperimentSettings& x = cfg_.experiment;
  require_days(x.validation_train_days, "lambda tuning");
  const Trajectory head = traj_.slice(0, test_begin());
  const int fit_days = x.validation_train_days - x.validation_days;
  DatasetSplit sp = split(head, fit_days, x.validation_days, cfg_.train.model.depth);
  const auto& seeds = x.tuning_seeds.empty() ? cfg_.train.seeds : x.tuning_seeds;

  std::size_t best = 0;
  std::vector<LambdaTrial> trials;
  for (double lambda : x.lambda_grid) {
    const Ensemble& e = train_cached(a, fit_days, lambda, sp.train, seeds, true);
    const EvalReport r = thermonet::evaluate(e.checkpoints, head, sp.test_begin, head.size(), 1,
                                             HorizonMetric::AtHorizon);
    trials.push_back({a, lambda, r.mean, r.std, false});
    if (r.mean.mae_T_r < trials[best].mean.mae_T_r) best = trials.size() - 1;
  }
  trials[best].selected = true;
  if (log_) {
    log_("selected lambda " + format_double(trials[best].lambda) + " for " + to_string(a) +
         " (validation T_r MAE " + format_double(trials[best].mean.mae_T_r) + ")");
  }
  trials_.insert(trials_.end(), trials.begin(), trials.end());
  tuned_[a] = trials[best].lambda;
  return trials[best].lambda;
}

const Ensemble& ExperimentRunner::ensemble(Architecture a, int train_days) {
  const double lambda = lambda_for(a);
  return train_cached(a, train_days, lambda, training_set(train_days), cfg_.train.seeds, false);
}

EvalReport ExperimentRunner::evaluate(const Ensemble& e, int H) const {
  EvalReport r =
      thermonet::evaluate(e.checkpoints, traj_, test_begin(), test_end(), H, cfg_.experiment.metric);
  if (cfg_.experiment.record_timing) {
    for (auto& s : r.per_seed) {
      for (const auto& run : e.runs) {
        if (run.seed == s.seed) s.train_seconds = run.seconds;
      }
    }
  }
  return r;
}

double ExperimentRunner::persistence(int H) const {
  return persistence_mae(traj_, test_begin(), test_end(), cfg_.train.model.depth, H,
                         cfg_.experiment.metric);
}

ValidationResult run_validation(ExperimentRunner& runner) {
  const RunConfig& cfg = runner.config();
  const int days = cfg.experiment.validation_train_days;
  constexpr int H = 1;
  ValidationResult res;
  res.architectures = cfg.experiment.architectures;
  for (Architecture a : res.architectures) {
    const Ensemble& e = runner.ensemble(a, days);
    res.reports.push_back(runner.evaluate(e, H));
    res.ensembles.push_back(e);
  }
  res.trials = runner.lambda_trials();
  res.persistence_mae = runner.persistence(H);

  const Trajectory& traj = runner.trajectory();
  const auto starts =
      test_window_starts(runner.test_begin(), runner.test_end(), cfg.train.model.depth, H);
  const ForecastInputs in = forecast_inputs(traj, starts, cfg.train.model.depth, H);
  res.trace.resize(starts.size());
  for (std::size_t c = 0; c < starts.size(); ++c) {
    TraceRow& t = res.trace[c];
    t.start = starts[c];
    t.time_of_day = traj.rows[starts[c]].time_of_day;
    t.T_r_next = traj.rows[starts[c] + 1].T_r;
    t.u_phys = traj.rows[starts[c]].u_phys;
    t.T_m = traj.rows[starts[c]].T_m;
  }
  for (const Ensemble& e : res.ensembles) {
    Eigen::RowVectorXd T = Eigen::RowVectorXd::Zero(in.batch());
    Eigen::RowVectorXd u = T, m = T;
    for (const auto& ck : e.checkpoints) {
      const ForecastOutputs f = recursive_forecast(ck, in, H);
      T += f.T_r.row(0);
      u += f.u_phys.row(0);
      if (ck.model->has_latent()) {
        m += f.latent.row(0);
      } else {
        m.array() += ck.normalizer.denormalize_target(0, 0.0);
      }
    }
    const double n = static_cast<double>(e.checkpoints.size());
    for (std::size_t c = 0; c < starts.size(); ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      res.trace[c].pred_T_r_next.push_back(T(ci) / n);
      res.trace[c].pred_u_phys.push_back(u(ci) / n);
      res.trace[c].pred_T_m.push_back(m(ci) / n);
    }
  }
  return res;
}

namespace {

SweepResult run_grid(ExperimentRunner& runner, const std::vector<int>& sizes,
                     const std::vector<int>& horizons) {
  SweepResult res;
  const auto& archs = runner.config().experiment.architectures;
  for (int d : sizes) {
    for (Architecture a : archs) res.ensembles.push_back(runner.ensemble(a, d));
  }
  for (int d : sizes) {
    for (int H : horizons) {
      for (const auto& e : res.ensembles) {
        if (e.train_days == d) res.reports.push_back(runner.evaluate(e, H));
      }
      res.persistence.push_back({d, H, runner.persistence(H)});
    }
  }
  return res;
}

std::string eval_header() { return std::string(kEvalCsvHeader) + "\n"; }

std::string summary_only(const std::string& rows) {
  std::istringstream in(rows);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto f = split_fields(line, ',');
    if (f.size() > 1 && (f[1] == "mean" || f[1] == "std")) out += line + "\n";
  }
  return out;
}

void write_in(const std::string& dir, const std::string& name, const std::string& body) {
  write_file((std::filesystem::path(dir) / name).string(), body);
}

}  // namespace

SweepResult run_size_sweep(ExperimentRunner& runner) {
  const auto& x = runner.config().experiment;
  return run_grid(runner, x.sweep_sizes, x.sweep_horizons);
}

SweepResult run_horizon_sweep(ExperimentRunner& runner) {
  const auto& x = runner.config().experiment;
  return run_grid(runner, x.horizon_sizes, x.horizon_grid);
}

std::string lambda_trials_csv(const std::vector<LambdaTrial>& trials) {
  std::ostringstream o;
  o << "arch,lambda,val_mae_Tr_mean,val_mae_Tr_std,val_mae_Tm_mean,selected\n";
  for (const auto& t : trials) {
    o << to_string(t.architecture) << ',' << format_double(t.lambda) << ','
      << format_double(t.mean.mae_T_r) << ',' << format_double(t.std.mae_T_r) << ','
      << (t.mean.mae_T_m ? format_double(*t.mean.mae_T_m) : "") << ','
      << (t.selected ? "true" : "false") << '\n';
  }
  return o.str();
}

std::string training_report_csv(const std::vector<Ensemble>& ensembles) {
  std::ostringstream o;
  o << "arch,train_days,lambda,seed,status,optimizer_steps,clamp_events,L_reg,L_phys,total,a11,a12,"
       "b,c13\n";
  for (const auto& e : ensembles) {
    for (const auto& r : e.runs) {
      o << to_string(e.architecture) << ',' << e.train_days << ',' << format_double(e.lambda) << ','
        << r.seed << ',';
      if (!r.error.empty()) {
        o << "diverged,,,,,,,,,\n";
        continue;
      }
      o << "ok," << r.optimizer_steps << ',' << r.clamp_events << ','
        << format_double(r.final_loss.L_reg) << ',' << format_double(r.final_loss.L_phys) << ','
        << format_double(r.final_loss.total) << ',' << format_double(r.physics.a11()) << ','
        << format_double(r.physics.a12()) << ',' << format_double(r.physics.b()) << ','
        << format_double(r.physics.c13()) << '\n';
    }
  }
  return o.str();
}

std::string timings_csv(const std::vector<Ensemble>& ensembles) {
  std::ostringstream o;
  o << "arch,train_days,lambda,seed,train_seconds\n";
  for (const auto& e : ensembles) {
    for (const auto& r : e.runs) {
      o << to_string(e.architecture) << ',' << e.train_days << ',' << format_double(e.lambda) << ','
        << r.seed << ',' << format_double(r.seconds) << '\n';
    }
  }
  return o.str();
}

void write_validation(const std::string& dir, const ValidationResult& r, const RunConfig& cfg) {
  std::string all = eval_header();
  for (const auto& rep : r.reports) all += eval_rows_csv(rep);
  write_in(dir, "validation_per_seed.csv", all);
  write_in(dir, "validation.csv",
           eval_header() + summary_only(all) +
               persistence_row_csv(cfg.experiment.validation_train_days, 1, r.persistence_mae));
  write_in(dir, "lambda_tuning.csv", lambda_trials_csv(r.trials));
  write_in(dir, "training_report.csv", training_report_csv(r.ensembles));
  write_in(dir, "timings.csv", timings_csv(r.ensembles));

  std::ostringstream t;
  t << "row,time_of_day,T_r_next,u_phys,T_m";
  for (Architecture a : r.architectures) {
    const std::string s = to_string(a);
    t << ',' << s << "_T_r_next," << s << "_u_phys," << s << "_T_m";
  }
  t << '\n';
  for (const auto& row : r.trace) {
    t << row.start << ',' << format_double(row.time_of_day) << ',' << format_double(row.T_r_next)
      << ',' << format_double(row.u_phys) << ',' << (row.T_m ? format_double(*row.T_m) : "");
    for (std::size_t i = 0; i < r.architectures.size(); ++i) {
      t << ',' << format_double(row.pred_T_r_next[i]) << ',' << format_double(row.pred_u_phys[i])
        << ',' << format_double(row.pred_T_m[i]);
    }
    t << '\n';
  }
  write_in(dir, "validation_trace.csv", t.str());

  if (!cfg.experiment.write_svg || r.trace.empty()) return;
  const double dt = cfg.simulation.dt_action;
  const double t0 = static_cast<double>(r.trace.front().start) * dt;
  for (const bool hidden : {false, true}) {
    Chart ch;
    ch.title = hidden ? "Thermal mass temperature, one-step estimate"
                      : "Room temperature, one-step prediction";
    ch.x_label = "hours into test span";
    ch.y_label = hidden ? "T_m (degC)" : "T_r (degC)";
    ChartSeries truth{"truth", {}, {}, {}, true};
    for (const auto& row : r.trace) {
      if (hidden && !row.T_m) continue;
      truth.x.push_back(static_cast<double>(row.start) * dt - t0);
      truth.y.push_back(hidden ? *row.T_m : row.T_r_next);
    }
    ch.series.push_back(truth);
    for (std::size_t i = 0; i < r.architectures.size(); ++i) {
      ChartSeries s{to_string(r.architectures[i]), {}, {}, {}, false};
      for (const auto& row : r.trace) {
        s.x.push_back(static_cast<double>(row.start) * dt - t0);
        s.y.push_back(hidden ? row.pred_T_m[i] : row.pred_T_r_next[i]);
      }
      ch.series.push_back(s);
    }
    write_in(dir, hidden ? "validation_T_m.svg" : "validation_T_r.svg", render_svg(ch));
  }
}

void write_sweep(const std::string& dir, const std::string& name, const SweepResult& r,
                 const RunConfig& cfg, bool by_size) {
  std::string all = eval_header();
  for (const auto& rep : r.reports) all += eval_rows_csv(rep);
  std::string persistence;
  for (const auto& p : r.persistence) persistence += persistence_row_csv(p.train_days, p.horizon, p.mae);
  write_in(dir, name + "_per_seed.csv", all + persistence);
  write_in(dir, name + ".csv", eval_header() + summary_only(all) + persistence);
  write_in(dir, name + "_training_report.csv", training_report_csv(r.ensembles));
  write_in(dir, name + "_timings.csv", timings_csv(r.ensembles));
  if (!cfg.experiment.write_svg) return;

  // One chart per fixed value of the other axis.
  std::vector<int> panels;
  for (const auto& rep : r.reports) {
    const int p = by_size ? rep.horizon : rep.train_days;
    if (std::find(panels.begin(), panels.end(), p) == panels.end()) panels.push_back(p);
  }
  for (int p : panels) {
    Chart ch;
    ch.title = by_size ? "T_r MAE vs training size, H = " + std::to_string(p) + " steps"
                       : "T_r MAE vs horizon, " + std::to_string(p) + " training days";
    ch.x_label = by_size ? "training days" : "horizon (hours)";
    ch.y_label = "T_r MAE (degC)";
    const double xscale = by_size ? 1.0 : cfg.simulation.dt_action;
    for (Architecture a : cfg.experiment.architectures) {
      ChartSeries s{to_string(a), {}, {}, {}, false};
      for (const auto& rep : r.reports) {
        if (rep.architecture != a || (by_size ? rep.horizon : rep.train_days) != p) continue;
        s.x.push_back(xscale * (by_size ? rep.train_days : rep.horizon));
        s.y.push_back(rep.mean.mae_T_r);
        s.spread.push_back(rep.std.mae_T_r);
      }
      ch.series.push_back(s);
    }
    ChartSeries pers{"persistence", {}, {}, {}, true};
    for (const auto& q : r.persistence) {
      if ((by_size ? q.horizon : q.train_days) != p) continue;
      pers.x.push_back(xscale * (by_size ? q.train_days : q.horizon));
      pers.y.push_back(q.mae);
    }
    ch.series.push_back(pers);
    write_in(dir, name + "_" + (by_size ? "H" : "days") + std::to_string(p) + ".svg", render_svg(ch));
  }
}

}  // namespace thermonet
