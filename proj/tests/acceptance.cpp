// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "thermonet/experiments.hpp"
#include "thermonet/physics.hpp"
#include "thermonet/runtime.hpp"
#include "thermonet/simulator.hpp"
#include "thermonet/text_io.hpp"

namespace fs = std::filesystem;
using namespace thermonet;

namespace {

// Pinned tolerances.
constexpr double kTrMaeMax = 0.3;           // criterion 1, all architectures
constexpr double kTmMaeMax = 0.6;           // criterion 1, physics variants
constexpr double kStubTmMaeMin = 1.0;       // criterion 1, MLP constant-latent stub
constexpr double kEnsembleBudgetSec = 900;  // criterion 1, per ensemble
constexpr double kSmallDataGain = 0.10;     // criterion 2, physics at least 10% below MLP
constexpr double kLargeDataSpread = 0.20;   // criterion 2, max/min - 1 at 120 days
constexpr double kOracleMaeMax = 0.2;       // criterion 4
constexpr double kFdStep = 1e-5;            // criterion 5
constexpr double kFdRelMax = 1e-4;          // criterion 5
constexpr double kFdFloor = 1e-6;           // criterion 5, denominator floor
constexpr int kFdInstances = 100;           // criterion 5
constexpr double kDefectRatioLo = 3.6;      // criterion 6
constexpr double kDefectRatioHi = 4.4;      // criterion 6

void detail(const std::string& s) { std::cerr << "  " << s << '\n'; }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4f", v);
  return b;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    detail(std::string(ok ? "ok   " : "FAIL ") + what);
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

int g_failed = 0;
std::map<int, std::string> g_lines;

// Lines are echoed to stderr as they come and printed in criterion order at the end.
void report(int n, const std::string& title, const Verdict& v) {
  std::string line = std::string(v.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(n) +
                     ": " + title;
  if (!v.pass) {
    line += " (" + std::to_string(v.failures.size()) + " check(s) failed, first: " +
            v.failures.front() + ")";
    ++g_failed;
  }
  std::cerr << line << std::endl;
  g_lines[n] = line;
}

const EvalReport* find(const std::vector<EvalReport>& rs, Architecture a, int days, int H) {
  for (const auto& r : rs) {
    if (r.architecture == a && r.train_days == days && r.horizon == H) return &r;
  }
  return nullptr;
}

double persistence_of(const SweepResult& s, int days, int H) {
  for (const auto& p : s.persistence) {
    if (p.train_days == days && p.horizon == H) return p.mae;
  }
  return NAN;
}

std::string tag(Architecture a) { return to_string(a); }

// ------------------------------------------------------------------ 1

void criterion_1(const ValidationResult& v, ExperimentRunner& runner) {
  Verdict c;
  for (const auto& t : v.trials) {
    detail("lambda trial " + tag(t.architecture) + " lambda " + format_double(t.lambda) +
           ": validation T_r MAE " + fmt(t.mean.mae_T_r) + (t.selected ? " (selected)" : ""));
  }
  for (const auto& r : v.reports) {
    const std::string a = tag(r.architecture);
    detail(a + ": T_r MAE " + fmt(r.mean.mae_T_r) + " +- " + fmt(r.std.mae_T_r) +
           ", T_m MAE " + fmt(r.mean.mae_T_m.value_or(NAN)) + ", seeds " +
           std::to_string(r.per_seed.size()) + ", windows " + std::to_string(r.windows));
    c.require(r.per_seed.size() == runner.config().train.seeds.size(),
              a + " ensemble has every seed");
    c.require(r.mean.mae_T_r <= kTrMaeMax, a + " T_r MAE " + fmt(r.mean.mae_T_r) + " <= 0.3");
    const double tm = r.mean.mae_T_m.value_or(NAN);
    if (r.architecture == Architecture::Mlp) {
      c.require(r.latent_stub && tm >= kStubTmMaeMin, "mlp stub T_m MAE " + fmt(tm) + " >= 1.0");
    } else {
      c.require(tm <= kTmMaeMax, a + " T_m MAE " + fmt(tm) + " <= 0.6");
    }
  }
  detail("persistence T_r MAE at H=1: " + fmt(v.persistence_mae));
  for (const auto& e : v.ensembles) {
    double total = 0.0;
    for (const auto& run : e.runs) total += run.seconds;
    c.require(total <= kEnsembleBudgetSec,
              tag(e.architecture) + " ensemble training time " + fmt(total) + " s <= 900 s");
  }
  report(1, "hidden-state estimation at H=1 on 120 days", c);
}

// ------------------------------------------------------------------ 2

void criterion_2(const SweepResult& s) {
  Verdict c;
  const int H = 24;
  for (const auto& r : s.reports) {
    if (r.horizon != H) continue;
    detail(tag(r.architecture) + " days " + std::to_string(r.train_days) + " H=24: T_r MAE " +
           fmt(r.mean.mae_T_r) + " +- " + fmt(r.std.mae_T_r));
  }
  for (int d : {15, 30, 45}) {
    const auto* mlp = find(s.reports, Architecture::Mlp, d, H);
    for (auto a : {Architecture::PhysReg, Architecture::PhysNet}) {
      const auto* p = find(s.reports, a, d, H);
      const bool ok = mlp && p && p->mean.mae_T_r <= (1.0 - kSmallDataGain) * mlp->mean.mae_T_r;
      c.require(ok, tag(a) + " at " + std::to_string(d) + " days " +
                        fmt(p ? p->mean.mae_T_r : NAN) + " <= 0.9 x mlp " +
                        fmt(mlp ? mlp->mean.mae_T_r : NAN));
    }
  }
  {
    double lo = INFINITY, hi = 0.0;
    for (auto a : {Architecture::Mlp, Architecture::PhysReg, Architecture::PhysNet}) {
      const auto* r = find(s.reports, a, 120, H);
      const double v = r ? r->mean.mae_T_r : NAN;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    c.require(hi <= (1.0 + kLargeDataSpread) * lo,
              "at 120 days max/min T_r MAE " + fmt(hi / lo) + " <= 1.2");
  }
  for (const auto& r : s.reports) {
    if (r.horizon != H || r.train_days < 30) continue;
    const double p = persistence_of(s, r.train_days, H);
    c.require(r.mean.mae_T_r < p, tag(r.architecture) + " at " + std::to_string(r.train_days) +
                                      " days " + fmt(r.mean.mae_T_r) + " < persistence " + fmt(p));
  }
  report(2, "data-efficiency trend at H=24", c);
}

// ------------------------------------------------------------------ 3

void criterion_3(const SweepResult& s) {
  Verdict c;
  const int d = 30, H = 48;
  for (const auto& r : s.reports) {
    if (r.train_days != d) continue;
    detail(tag(r.architecture) + " H=" + std::to_string(r.horizon) + ": T_r MAE " +
           fmt(r.mean.mae_T_r) + " +- " + fmt(r.std.mae_T_r));
  }
  const auto* mlp = find(s.reports, Architecture::Mlp, d, H);
  for (auto a : {Architecture::PhysReg, Architecture::PhysNet}) {
    const auto* p = find(s.reports, a, d, H);
    if (!mlp || !p) {
      c.require(false, "reports present for 30 days at H=48");
      continue;
    }
    c.require(mlp->mean.mae_T_r > p->mean.mae_T_r,
              "mlp mean " + fmt(mlp->mean.mae_T_r) + " > " + tag(a) + " " + fmt(p->mean.mae_T_r));
    c.require(p->std.mae_T_r < mlp->std.mae_T_r,
              tag(a) + " std " + fmt(p->std.mae_T_r) + " < mlp std " + fmt(mlp->std.mae_T_r));
  }
  report(3, "horizon robustness at H=48 with 30 days", c);
}

// ------------------------------------------------------------------ 4

void criterion_4() {
  Verdict c;
  SimulationConfig sc;
  sc.ambient.noise_sigma = 0.0;
  sc.ambient.weather_sigma = 0.0;
  const Trajectory t = simulate(sc);
  const PhysicsParams pp = params_from_rc(sc.thermal);
  const std::size_t begin = t.size() - 5 * t.steps_per_day();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = begin; i + 1 < t.size(); ++i) {
    const auto& r = t.rows[i];
    const auto h = hidden_state_target(r.T_r, t.rows[i + 1].T_r, r.T_r, r.u_phys, r.T_a, pp,
                                       t.dt_action);
    sum += std::abs(h.value - *r.T_m);
    ++n;
  }
  const double mae = sum / static_cast<double>(n);
  c.require(mae < kOracleMaeMax,
            "reconstruction MAE " + fmt(mae) + " < 0.2 over " + std::to_string(n) + " rows");
  report(4, "physics-target oracle on noiseless data", c);
}

// ------------------------------------------------------------------ 5

struct FdInstance {
  std::unique_ptr<ThermalModel> model;
  PhysicsParams pp;
  Eigen::MatrixXd x, x_prev;
  PhysicsBatch batch;
  OutputScaling scaling;
  double lambda = 1.0;
};

double fd_loss(const FdInstance& f) {
  const Eigen::MatrixXd out = f.model->predict(f.x);
  const Eigen::RowVectorXd paired = f.model->predict(f.x_prev).row(kRowTemp);
  return composite_loss(out, &paired, f.batch, f.pp, f.lambda, f.scaling).breakdown.total;
}

void criterion_5() {
  Verdict c;
  SimulationConfig sc;
  sc.n_days = 4;
  const int depth = 2;
  Dataset ds = build_samples(simulate(sc), depth);
  ds.normalizer = fit_normalizer(ds);
  const auto linked = ds.linked_positions();

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::array<double, 3> lambdas{0.1, 1.0, 10.0};
  double worst = 0.0;
  std::size_t checked = 0, bad = 0;
  for (int inst = 0; inst < kFdInstances; ++inst) {
    FdInstance f;
    ModelSpec spec;
    spec.depth = depth;
    spec.trunk_hidden = {5, 4};
    spec.encoder_hidden = {4};
    spec.dynamics_hidden = {6};
    const Architecture arch = inst % 2 ? Architecture::PhysReg : Architecture::PhysNet;
    f.model = make_model(arch, spec, static_cast<std::uint64_t>(1000 + inst));
    Eigen::VectorXd p = f.model->parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) += 0.1 * nd(rng);
    f.model->set_parameters(p);
    f.pp = params_from_rc(sc.thermal);
    for (double& v : f.pp.values) v *= std::exp(0.3 * nd(rng));
    f.lambda = lambdas[static_cast<std::size_t>(inst) % 3];
    f.scaling = OutputScaling::from(*ds.normalizer);

    std::vector<std::size_t> pos(6);
    std::uniform_int_distribution<std::size_t> pick(0, linked.size() - 1);
    for (auto& q : pos) q = linked[pick(rng)];
    f.batch = make_physics_batch(ds, pos);
    f.x = ds.feature_matrix(pos);
    f.x_prev = ds.feature_matrix(f.batch.paired_positions);

    const ModelForward fwd = f.model->forward(f.x);
    const ModelForward prev = f.model->forward(f.x_prev);
    const Eigen::RowVectorXd paired = prev.output.row(kRowTemp);
    const LossResult lr = composite_loss(fwd.output, &paired, f.batch, f.pp, f.lambda, f.scaling);
    Eigen::MatrixXd d_prev = Eigen::MatrixXd::Zero(prev.output.rows(), prev.output.cols());
    d_prev.row(kRowTemp) = lr.d_paired_temp;
    const Eigen::VectorXd g_model =
        f.model->backward(fwd, lr.d_output) + f.model->backward(prev, d_prev);

    auto compare = [&](double analytic, const std::function<void(double)>& set, double base) {
      set(base + kFdStep);
      const double fp = fd_loss(f);
      set(base - kFdStep);
      const double fm = fd_loss(f);
      set(base);
      const double fd = (fp - fm) / (2.0 * kFdStep);
      const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), kFdFloor});
      worst = std::max(worst, rel);
      ++checked;
      bad += rel >= kFdRelMax;
    };
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      compare(g_model(i), [&](double v) {
        Eigen::VectorXd q = p;
        q(i) = v;
        f.model->set_parameters(q);
      }, p(i));
    }
    Eigen::Index o = 0;
    for (std::size_t k = 0; k < PhysicsParams::kCount; ++k) {
      if (!f.pp.trainable[k]) continue;
      const double base = f.pp.values[k];
      compare(lr.d_physics(o++), [&f, k](double v) { f.pp.values[k] = v; }, base);
    }
  }
  detail(std::to_string(checked) + " partial derivatives over " + std::to_string(kFdInstances) +
         " instances, worst relative error " + [&] {
           std::ostringstream s;
           s << worst;
           return s.str();
         }());
  c.require(bad == 0, std::to_string(bad) + " derivatives with relative error >= 1e-4");
  report(5, "composite-loss gradients match central differences", c);
}

// ------------------------------------------------------------------ 6

void criterion_6() {
  Verdict c;
  const ThermalParams tp;
  {
    const ThermalState s{17.5, 17.5};
    const ExogenousInputs w{17.5, 0.0, 0.0};
    const auto d = derivatives(s, tp, 0.0, w);
    const auto n = euler_substep(s, tp, 0.0, w, 1.0 / 60.0);
    c.require(d.dT_r == 0.0 && d.dT_m == 0.0 && n.T_r == s.T_r && n.T_m == s.T_m,
              "equilibrium is an exact fixed point");
  }
  {
    SimulationConfig sc;
    std::vector<SubstepRecord> trace;
    const Trajectory t = simulate(sc, &trace);
    std::size_t violations = 0, overrides = 0;
    for (const auto& s : trace) {
      const double want = s.T_r < tp.T_r_min ? tp.u_max : s.T_r > tp.T_r_max ? 0.0 : s.u;
      violations += s.u_phys != want;
      overrides += s.u_phys != s.u;
    }
    std::size_t row_mismatch = 0;
    const auto k = static_cast<std::size_t>(sc.substeps);
    for (std::size_t i = 0; i < t.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += trace[i * k + j].u_phys;
      row_mismatch += t.rows[i].u_phys != acc / static_cast<double>(k);
    }
    detail(std::to_string(t.size()) + " rows, " + std::to_string(trace.size()) + " substeps, " +
           std::to_string(overrides) + " overrides");
    c.require(violations == 0 && row_mismatch == 0 && trace.size() == t.size() * k,
              "backup-controller relation on every row (" + std::to_string(violations) +
                  " substep and " + std::to_string(row_mismatch) + " row mismatches)");
    c.require(simulate(sc) == t, "same seed gives a bit-identical trajectory");
    SimulationConfig other = sc;
    other.seed += 1;
    c.require(!(simulate(other) == t), "a different seed gives a different trajectory");
  }
  {
    const ThermalState s0{21.0, 15.0};
    const ExogenousInputs w{5.0, 0.0, 0.0};
    const double u = 0.7;
    auto f = [&](const ThermalState& x) { return derivatives(x, tp, u, w); };
    auto exact = [&](double dt) {
      ThermalState s = s0;
      const int n = 100000;
      const double h = dt / n;
      for (int i = 0; i < n; ++i) {
        const auto k1 = f(s);
        const auto k2 = f({s.T_r + h / 2 * k1.dT_r, s.T_m + h / 2 * k1.dT_m});
        const auto k3 = f({s.T_r + h / 2 * k2.dT_r, s.T_m + h / 2 * k2.dT_m});
        const auto k4 = f({s.T_r + h * k3.dT_r, s.T_m + h * k3.dT_m});
        s.T_r += h / 6 * (k1.dT_r + 2 * k2.dT_r + 2 * k3.dT_r + k4.dT_r);
        s.T_m += h / 6 * (k1.dT_m + 2 * k2.dT_m + 2 * k3.dT_m + k4.dT_m);
      }
      return s;
    };
    auto defect = [&](double dt) {
      const auto e = euler_substep(s0, tp, u, w, dt);
      const auto r = exact(dt);
      return std::hypot(e.T_r - r.T_r, e.T_m - r.T_m);
    };
    const double ratio = defect(0.1) / defect(0.05);
    c.require(ratio >= kDefectRatioLo && ratio <= kDefectRatioHi,
              "one-step defect ratio on halving dt " + fmt(ratio) + " in [3.6, 4.4]");
  }
  report(6, "simulator properties", c);
}

// ------------------------------------------------------------------ 7

std::map<std::string, std::string> result_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name == "timings.csv") continue;
    out[name] = read_file(e.path().string());
  }
  return out;
}

void criterion_7(const RunConfig& cfg, const Trajectory& traj, const fs::path& first,
                 const fs::path& second) {
  Verdict c;
  {
    ExperimentRunner fresh(cfg, traj, [](const std::string& m) { detail("[run 2] " + m); });
    write_validation(second.string(), run_validation(fresh), cfg);
  }
  const auto a = result_files(first), b = result_files(second);
  for (const char* name : {"validation.csv", "validation_per_seed.csv", "lambda_tuning.csv",
                           "training_report.csv", "validation_trace.csv"}) {
    c.require(a.count(name) == 1, std::string(name) + " written");
  }
  for (const auto& [name, text] : a) {
    const auto it = b.find(name);
    c.require(it != b.end() && it->second == text, name + " byte-identical");
  }
  c.require(a.size() == b.size(), "same file set in both runs");
  report(7, "validation experiment reproduces byte-identical results", c);
}

}  // namespace

int main() {
  configure_allocator();
  const fs::path root = fs::path(output_root("acceptance_output"));
  fs::remove_all(root);
  const fs::path run1 = root / "validation_run1", run2 = root / "validation_run2";
  const fs::path sweeps = root / "sweeps";
  fs::create_directories(run1);
  fs::create_directories(run2);
  fs::create_directories(sweeps);

  RunConfig cfg;
  cfg.experiment.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  cfg.output_dir = root.string();
  std::cerr << "acceptance: outputs under " << root << ", " << cfg.experiment.jobs << " job(s)\n";
  std::cerr << "acceptance: manifest\n" << run_config_to_text(cfg);

  criterion_4();
  criterion_5();
  criterion_6();

  const Trajectory traj = simulate(cfg.simulation);
  ExperimentRunner runner(cfg, traj, [](const std::string& m) { detail(m); });
  const ValidationResult v = run_validation(runner);
  write_validation(run1.string(), v, cfg);
  criterion_1(v, runner);

  const SweepResult size = run_size_sweep(runner);
  write_sweep(sweeps.string(), "size_sweep", size, cfg, true);
  criterion_2(size);

  const SweepResult horizon = run_horizon_sweep(runner);
  write_sweep(sweeps.string(), "horizon_sweep", horizon, cfg, false);
  criterion_3(horizon);

  criterion_7(cfg, traj, run1, run2);

  for (const auto& [n, line] : g_lines) std::cout << line << '\n';
  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " criterion(s) failed")
            << std::endl;
  return g_failed == 0 ? 0 : 1;
}
