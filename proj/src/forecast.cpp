#include "thermonet/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "thermonet/physics.hpp"
#include "thermonet/text_io.hpp"

namespace thermonet {

ForecastInputs forecast_inputs(const Trajectory& traj, std::span<const std::size_t> starts,
                               int depth, int steps) {
  if (depth < 0) throw std::invalid_argument("forecast_inputs: depth must be >= 0");
  if (steps < 1) throw std::invalid_argument("forecast_inputs: steps must be >= 1");
  const auto k = static_cast<std::size_t>(depth);
  const auto B = static_cast<Eigen::Index>(starts.size());
  const Eigen::Index W = depth + 1;
  ForecastInputs in;
  in.temp_window.resize(W, B);
  in.power_window.resize(W, B);
  in.actions.resize(steps, B);
  in.time_of_day.resize(steps, B);
  in.T_a.resize(steps, B);
  for (Eigen::Index c = 0; c < B; ++c) {
    const std::size_t s = starts[static_cast<std::size_t>(c)];
    if (s < k + 1) {
      throw std::invalid_argument("forecast_inputs: history window before row 0 at start " +
                                  std::to_string(s));
    }
    if (s + static_cast<std::size_t>(steps) > traj.size()) {
      throw std::invalid_argument("forecast_inputs: horizon runs past the available exogenous data");
    }
    for (Eigen::Index w = 0; w < W; ++w) {
      const std::size_t back = k - static_cast<std::size_t>(w);
      in.temp_window(w, c) = traj.rows[s - back].T_r;
      in.power_window(w, c) = traj.rows[s - back - 1].u_phys;
    }
    for (int j = 0; j < steps; ++j) {
      const TrajectoryRow& r = traj.rows[s + static_cast<std::size_t>(j)];
      in.actions(j, c) = r.u;
      in.time_of_day(j, c) = r.time_of_day;
      in.T_a(j, c) = r.T_a;
    }
  }
  return in;
}

ForecastOutputs recursive_forecast(const Checkpoint& ckpt, const ForecastInputs& in, int H) {
  if (!ckpt.model) throw std::invalid_argument("recursive_forecast: checkpoint has no model");
  if (H < 1) throw std::invalid_argument("recursive_forecast: H must be >= 1");
  if (H > in.steps() || in.time_of_day.rows() < H || in.T_a.rows() < H) {
    throw std::invalid_argument("recursive_forecast: H = " + std::to_string(H) +
                                " exceeds the supplied exogenous steps");
  }
  const ThermalModel& model = *ckpt.model;
  const Eigen::Index k = model.spec().depth;
  const Eigen::Index B = in.batch();
  if (in.temp_window.rows() != k + 1 || in.power_window.rows() != k + 1 ||
      in.power_window.cols() != B) {
    throw std::invalid_argument("recursive_forecast: window size does not match model depth");
  }
  const OutputScaling sc = OutputScaling::from(ckpt.normalizer);

  Eigen::MatrixXd temps = in.temp_window;
  Eigen::MatrixXd powers = in.power_window;
  ForecastOutputs out;
  out.T_r.resize(H, B);
  out.u_phys.resize(H, B);
  if (model.has_latent()) out.latent.resize(H, B);

  Eigen::MatrixXd x(2 * k + 6, B);
  for (int j = 0; j < H; ++j) {
    x.topRows(k) = temps.topRows(k);
    x.middleRows(k, k) = powers.topRows(k);
    x.row(2 * k) = temps.row(k);
    x.row(2 * k + 1) = powers.row(k);
    x.row(2 * k + 2) = in.actions.row(j);
    for (Eigen::Index c = 0; c < B; ++c) {
      const auto tod = time_of_day_encoding(in.time_of_day(j, c));
      x(2 * k + 3, c) = tod[0];
      x(2 * k + 4, c) = tod[1];
    }
    x.row(2 * k + 5) = in.T_a.row(j);
    ckpt.normalizer.apply_features(x);

    const Eigen::MatrixXd y = model.predict(x);
    const Eigen::RowVectorXd T_next = (y.row(kRowTemp).array() * sc.T_scale + sc.T_mean).matrix();
    const Eigen::RowVectorXd u_hat = (y.row(kRowPower).array() * sc.u_scale + sc.u_mean)
                                         .cwiseMax(0.0)
                                         .cwiseMin(ckpt.u_max)
                                         .matrix();
    out.T_r.row(j) = T_next;
    out.u_phys.row(j) = u_hat;
    if (model.has_latent()) {
      out.latent.row(j) = (y.row(kRowLatent).array() * sc.T_scale + sc.T_mean).matrix();
    }

    if (k > 0) {
      temps.topRows(k) = temps.bottomRows(k).eval();
      powers.topRows(k) = powers.bottomRows(k).eval();
    }
    temps.row(k) = T_next;
    powers.row(k) = u_hat;
  }
  return out;
}

std::vector<double> persistence_forecast(std::span<const double> series, int H) {
  if (H < 1) throw std::invalid_argument("persistence_forecast: H must be >= 1");
  const auto h = static_cast<std::size_t>(H);
  if (series.size() <= h) return {};
  return {series.begin(), series.end() - static_cast<std::ptrdiff_t>(h)};
}

std::string to_string(HorizonMetric m) {
  return m == HorizonMetric::AtHorizon ? "at-horizon" : "path-average";
}

HorizonMetric horizon_metric_from_string(const std::string& s) {
  if (s == "at-horizon") return HorizonMetric::AtHorizon;
  if (s == "path-average") return HorizonMetric::PathAverage;
  throw std::invalid_argument("unknown horizon metric '" + s + "' (at-horizon|path-average)");
}

std::vector<std::size_t> test_window_starts(std::size_t begin, std::size_t end, int depth, int H) {
  if (H < 1) throw std::invalid_argument("test_window_starts: H must be >= 1");
  std::vector<std::size_t> starts;
  const std::size_t first = begin + static_cast<std::size_t>(depth) + 1;
  for (std::size_t s = first; s + static_cast<std::size_t>(H) < end; ++s) starts.push_back(s);
  return starts;
}

namespace {

// Mean absolute error over columns, either at the last step or along the path.
double window_mae(const Eigen::MatrixXd& err, HorizonMetric metric) {
  if (metric == HorizonMetric::AtHorizon) return err.row(err.rows() - 1).cwiseAbs().mean();
  return err.cwiseAbs().mean();
}

double population_std(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

MetricStats summarize(const std::vector<SeedMetrics>& per_seed, bool want_std) {
  if (per_seed.empty()) throw std::invalid_argument("summarize: no seeds");
  std::vector<double> T, u, m;
  for (const auto& s : per_seed) {
    T.push_back(s.mae_T_r);
    u.push_back(s.mae_u);
    if (s.mae_T_m) m.push_back(*s.mae_T_m);
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  MetricStats r;
  const double mT = mean(T), mu = mean(u);
  r.mae_T_r = want_std ? population_std(T, mT) : mT;
  r.mae_u = want_std ? population_std(u, mu) : mu;
  if (m.size() == per_seed.size()) {
    const double mm = mean(m);
    r.mae_T_m = want_std ? population_std(m, mm) : mm;
  }
  return r;
}

EvalReport evaluate(const std::vector<Checkpoint>& checkpoints, const Trajectory& traj,
                    std::size_t test_begin, std::size_t test_end, int H, HorizonMetric metric) {
  if (checkpoints.empty()) throw std::invalid_argument("evaluate: no checkpoints");
  if (H < 1) throw std::invalid_argument("evaluate: H must be >= 1");
  test_end = std::min(test_end, traj.size());
  const Checkpoint& first = checkpoints.front();
  const int depth = first.depth();
  for (const auto& c : checkpoints) {
    if (c.architecture() != first.architecture() || c.depth() != depth) {
      throw std::invalid_argument("evaluate: checkpoints mix architectures or depths");
    }
  }
  const std::vector<std::size_t> starts = test_window_starts(test_begin, test_end, depth, H);
  if (starts.empty()) throw std::invalid_argument("evaluate: test set has no valid windows");

  const ForecastInputs in = forecast_inputs(traj, starts, depth, H);
  const auto B = static_cast<Eigen::Index>(starts.size());
  Eigen::MatrixXd T_true(H, B), u_true(H, B), m_true(H, B);
  bool hidden = true;
  for (Eigen::Index c = 0; c < B; ++c) {
    const std::size_t s = starts[static_cast<std::size_t>(c)];
    for (int j = 0; j < H; ++j) {
      const TrajectoryRow& r = traj.rows[s + static_cast<std::size_t>(j)];
      T_true(j, c) = traj.rows[s + static_cast<std::size_t>(j) + 1].T_r;
      u_true(j, c) = r.u_phys;
      if (r.T_m) {
        m_true(j, c) = *r.T_m;
      } else {
        hidden = false;
      }
    }
  }

  EvalReport rep;
  rep.architecture = first.architecture();
  rep.train_days = first.train_days;
  rep.horizon = H;
  rep.metric = metric;
  rep.windows = starts.size();
  rep.latent_stub = !first.model->has_latent();
  for (const auto& ckpt : checkpoints) {
    const ForecastOutputs f = recursive_forecast(ckpt, in, H);
    SeedMetrics sm;
    sm.seed = ckpt.seed;
    sm.mae_T_r = window_mae(f.T_r - T_true, metric);
    sm.mae_u = window_mae(f.u_phys - u_true, metric);
    if (hidden) {
      const Eigen::MatrixXd est =
          rep.latent_stub
              ? Eigen::MatrixXd::Constant(H, B, ckpt.normalizer.denormalize_target(0, 0.0))
              : f.latent;
      sm.mae_T_m = window_mae(est - m_true, metric);
    }
    rep.per_seed.push_back(sm);
  }
  rep.mean = summarize(rep.per_seed, false);
  rep.std = summarize(rep.per_seed, true);
  return rep;
}

double persistence_mae(const Trajectory& traj, std::size_t test_begin, std::size_t test_end,
                       int depth, int H, HorizonMetric metric) {
  test_end = std::min(test_end, traj.size());
  const std::vector<std::size_t> starts = test_window_starts(test_begin, test_end, depth, H);
  if (starts.empty()) throw std::invalid_argument("persistence_mae: test set has no valid windows");
  std::vector<double> series;
  for (std::size_t i = test_begin; i < test_end; ++i) series.push_back(traj.rows[i].T_r);
  Eigen::MatrixXd err(H, static_cast<Eigen::Index>(starts.size()));
  for (int j = 1; j <= H; ++j) {
    const std::vector<double> pred = persistence_forecast(series, j);
    for (std::size_t c = 0; c < starts.size(); ++c) {
      const std::size_t local = starts[c] - test_begin;
      err(j - 1, static_cast<Eigen::Index>(c)) = pred[local] - series[local + static_cast<std::size_t>(j)];
    }
  }
  return window_mae(err, metric);
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void row(std::ostringstream& out, const std::string& arch, const std::string& seed, int days,
         int H, const std::optional<double>& T, const std::optional<double>& u,
         const std::optional<double>& m, const std::optional<double>& secs) {
  out << arch << ',' << seed << ',' << days << ',' << H << ',' << cell(T) << ',' << cell(u) << ','
      << cell(m) << ',' << cell(secs) << '\n';
}

}  // namespace

std::string eval_rows_csv(const EvalReport& r) {
  std::ostringstream out;
  const std::string arch = to_string(r.architecture);
  std::vector<double> secs;
  for (const auto& s : r.per_seed) {
    row(out, arch, std::to_string(s.seed), r.train_days, r.horizon, s.mae_T_r, s.mae_u, s.mae_T_m,
        s.train_seconds);
    if (s.train_seconds) secs.push_back(*s.train_seconds);
  }
  std::optional<double> mean_secs, std_secs;
  if (!secs.empty() && secs.size() == r.per_seed.size()) {
    double acc = 0.0;
    for (double x : secs) acc += x;
    mean_secs = acc / static_cast<double>(secs.size());
    std_secs = population_std(secs, *mean_secs);
  }
  row(out, arch, "mean", r.train_days, r.horizon, r.mean.mae_T_r, r.mean.mae_u, r.mean.mae_T_m,
      mean_secs);
  row(out, arch, "std", r.train_days, r.horizon, r.std.mae_T_r, r.std.mae_u, r.std.mae_T_m,
      std_secs);
  return out.str();
}

std::string persistence_row_csv(int train_days, int H, double mae) {
  std::ostringstream out;
  row(out, "persistence", "mean", train_days, H, mae, std::nullopt, std::nullopt, std::nullopt);
  return out.str();
}

}  // namespace thermonet
