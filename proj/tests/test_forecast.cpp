#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "thermonet/checkpoint.hpp"
#include "thermonet/forecast.hpp"

namespace thermonet {
namespace {

using testing::tiny_split;
using testing::tiny_train;
using testing::tiny_trajectory;

class Forecast : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    traj_ = new Trajectory(tiny_trajectory());
    split_ = new DatasetSplit(tiny_split(*traj_));
    ckpts_ = new std::vector<Checkpoint>;
    for (auto a : {Architecture::PhysNet, Architecture::PhysReg, Architecture::Mlp}) {
      for (std::uint64_t s : {1, 2}) {
        ckpts_->push_back(
            train_one(tiny_train(a), s, split_->train, params_from_rc(ThermalParams{}), 2.0)
                .checkpoint);
      }
    }
  }
  static void TearDownTestSuite() {
    delete ckpts_;
    delete split_;
    delete traj_;
  }
  static std::vector<Checkpoint> of(Architecture a) {
    std::vector<Checkpoint> out;
    for (const auto& c : *ckpts_) {
      if (c.architecture() == a) out.push_back(c);
    }
    return out;
  }

  static Trajectory* traj_;
  static DatasetSplit* split_;
  static std::vector<Checkpoint>* ckpts_;
};

Trajectory* Forecast::traj_ = nullptr;
DatasetSplit* Forecast::split_ = nullptr;
std::vector<Checkpoint>* Forecast::ckpts_ = nullptr;

TEST_F(Forecast, OneStepEqualsForwardPass) {
  const auto& ds = split_->test;
  std::vector<std::size_t> pos{0, 7, ds.size() - 1};
  std::vector<std::size_t> starts;
  for (auto p : pos) starts.push_back(ds.samples[p].index);
  const Eigen::MatrixXd x = ds.feature_matrix(pos);
  for (const auto& c : *ckpts_) {
    const auto in = forecast_inputs(*traj_, starts, 4, 1);
    const auto out = recursive_forecast(c, in, 1);
    const Eigen::MatrixXd y = c.model->predict(x);
    for (std::size_t b = 0; b < pos.size(); ++b) {
      const auto B = static_cast<Eigen::Index>(b);
      EXPECT_NEAR(out.T_r(0, B), c.normalizer.denormalize_target(0, y(0, B)), 1e-12);
      const double u = std::clamp(c.normalizer.denormalize_target(1, y(1, B)), 0.0, c.u_max);
      EXPECT_NEAR(out.u_phys(0, B), u, 1e-12);
      if (c.model->has_latent()) {
        EXPECT_NEAR(out.latent(0, B), c.normalizer.denormalize_target(0, y(2, B)), 1e-12);
      } else {
        EXPECT_EQ(out.latent.size(), 0);
      }
    }
  }
}

TEST_F(Forecast, SecondStepFeedsPredictionsBack) {
  const Checkpoint c = of(Architecture::PhysNet).front();
  const std::size_t s = split_->test_begin + 20;
  const std::vector<std::size_t> starts{s};
  const auto out = recursive_forecast(c, forecast_inputs(*traj_, starts, 4, 2), 2);

  Sample m;
  m.index = s + 1;
  for (std::size_t r = s - 3; r <= s; ++r) m.temp_history.push_back(traj_->rows[r].T_r);
  for (std::size_t r = s - 4; r <= s - 1; ++r) m.power_history.push_back(traj_->rows[r].u_phys);
  m.observed = {out.T_r(0, 0), out.u_phys(0, 0)};
  m.action = traj_->rows[s + 1].u;
  const auto tod = time_of_day_encoding(traj_->rows[s + 1].time_of_day);
  m.exogenous = {tod[0], tod[1], traj_->rows[s + 1].T_a};
  Eigen::MatrixXd x(feature_width(4), 1);
  write_features(m, std::span<double>(x.data(), feature_width(4)));
  c.normalizer.apply_features(x);
  const Eigen::MatrixXd y = c.model->predict(x);
  EXPECT_NEAR(out.T_r(1, 0), c.normalizer.denormalize_target(0, y(0, 0)), 1e-12);
}

TEST_F(Forecast, FutureTruthIsNeverRead) {
  const Checkpoint c = of(Architecture::PhysReg).front();
  const std::size_t s = split_->test_begin + 10;
  const std::vector<std::size_t> starts{s};
  const auto a = recursive_forecast(c, forecast_inputs(*traj_, starts, 4, 12), 12);
  Trajectory corrupted = *traj_;
  for (std::size_t r = s + 1; r < corrupted.size(); ++r) {
    corrupted.rows[r].T_r += 50.0;
    corrupted.rows[r].u_phys = -7.0;
    corrupted.rows[r].T_m = 99.0;
  }
  corrupted.rows[s].u_phys = 123.0;
  const auto b = recursive_forecast(c, forecast_inputs(corrupted, starts, 4, 12), 12);
  EXPECT_EQ(a.T_r, b.T_r);
  EXPECT_EQ(a.u_phys, b.u_phys);
}

TEST_F(Forecast, PredictedPowerIsClamped) {
  for (const auto& c : *ckpts_) {
    std::vector<std::size_t> starts;
    for (std::size_t s = split_->test_begin + 5; s < split_->test_begin + 60; s += 5) starts.push_back(s);
    const auto out = recursive_forecast(c, forecast_inputs(*traj_, starts, 4, 24), 24);
    EXPECT_GE(out.u_phys.minCoeff(), 0.0);
    EXPECT_LE(out.u_phys.maxCoeff(), c.u_max);
    EXPECT_TRUE(out.T_r.allFinite());
  }
}

TEST_F(Forecast, InputRangeChecks) {
  const std::vector<std::size_t> early{4};
  EXPECT_THROW(forecast_inputs(*traj_, early, 4, 1), std::invalid_argument);
  const std::vector<std::size_t> ok{5};
  EXPECT_NO_THROW(forecast_inputs(*traj_, ok, 4, 1));
  const std::vector<std::size_t> late{traj_->size() - 3};
  EXPECT_NO_THROW(forecast_inputs(*traj_, late, 4, 3));
  EXPECT_THROW(forecast_inputs(*traj_, late, 4, 4), std::invalid_argument);
  const auto in = forecast_inputs(*traj_, ok, 4, 3);
  EXPECT_THROW(recursive_forecast(ckpts_->front(), in, 4), std::invalid_argument);
  EXPECT_THROW(recursive_forecast(ckpts_->front(), in, 0), std::invalid_argument);
}

TEST(Persistence, ConstantAndRampSeries) {
  const std::vector<double> flat(10, 3.5);
  for (double v : persistence_forecast(flat, 3)) EXPECT_EQ(v, 3.5);
  EXPECT_EQ(persistence_forecast(flat, 3).size(), 7u);
  EXPECT_TRUE(persistence_forecast(flat, 10).empty());
  EXPECT_THROW(persistence_forecast(flat, 0), std::invalid_argument);

  Trajectory t = tiny_trajectory(3);
  for (std::size_t i = 0; i < t.size(); ++i) t.rows[i].T_r = 0.25 * static_cast<double>(i);
  EXPECT_NEAR(persistence_mae(t, 48, 144, 4, 1), 0.25, 1e-12);
  EXPECT_NEAR(persistence_mae(t, 48, 144, 4, 6), 1.5, 1e-12);
  EXPECT_NEAR(persistence_mae(t, 48, 144, 4, 6, HorizonMetric::PathAverage), 0.25 * 3.5, 1e-12);
}

TEST(TestWindows, CountsStayInsideTheSpan) {
  EXPECT_EQ(test_window_starts(5760, 6000, 8, 1).size(), 230u);
  EXPECT_EQ(test_window_starts(5760, 6000, 8, 1).front(), 5769u);
  EXPECT_EQ(test_window_starts(5760, 6000, 8, 1).back(), 5998u);
  EXPECT_EQ(test_window_starts(5760, 6000, 8, 48).size(), 183u);
  EXPECT_TRUE(test_window_starts(0, 10, 8, 1).empty());
}

TEST(HorizonMetricNames, RoundTrip) {
  for (auto m : {HorizonMetric::AtHorizon, HorizonMetric::PathAverage}) {
    EXPECT_EQ(horizon_metric_from_string(to_string(m)), m);
  }
  EXPECT_THROW(horizon_metric_from_string("average"), std::invalid_argument);
}

TEST_F(Forecast, EvaluateMatchesDirectComputation) {
  const Checkpoint c = of(Architecture::PhysNet).front();
  const int H = 3;
  const auto rep = evaluate({c}, *traj_, split_->test_begin, traj_->size(), H);
  const auto starts = test_window_starts(split_->test_begin, traj_->size(), 4, H);
  EXPECT_EQ(rep.windows, starts.size());
  const auto out = recursive_forecast(c, forecast_inputs(*traj_, starts, 4, H), H);
  double eT = 0, eu = 0, em = 0;
  for (std::size_t b = 0; b < starts.size(); ++b) {
    const auto B = static_cast<Eigen::Index>(b);
    eT += std::abs(out.T_r(H - 1, B) - traj_->rows[starts[b] + H].T_r);
    eu += std::abs(out.u_phys(H - 1, B) - traj_->rows[starts[b] + H - 1].u_phys);
    em += std::abs(out.latent(H - 1, B) - *traj_->rows[starts[b] + H - 1].T_m);
  }
  const double n = static_cast<double>(starts.size());
  ASSERT_EQ(rep.per_seed.size(), 1u);
  EXPECT_NEAR(rep.per_seed[0].mae_T_r, eT / n, 1e-12);
  EXPECT_NEAR(rep.per_seed[0].mae_u, eu / n, 1e-12);
  EXPECT_NEAR(*rep.per_seed[0].mae_T_m, em / n, 1e-12);
  EXPECT_FALSE(rep.latent_stub);
}

TEST_F(Forecast, MlpIsScoredWithConstantStub) {
  const auto cs = of(Architecture::Mlp);
  const auto rep = evaluate(cs, *traj_, split_->test_begin, traj_->size(), 1);
  EXPECT_TRUE(rep.latent_stub);
  const double stub = cs.front().normalizer.target_mean(0);
  const auto starts = test_window_starts(split_->test_begin, traj_->size(), 4, 1);
  double e = 0;
  for (auto s : starts) e += std::abs(stub - *traj_->rows[s].T_m);
  EXPECT_NEAR(*rep.per_seed[0].mae_T_m, e / static_cast<double>(starts.size()), 1e-12);
  EXPECT_EQ(*rep.per_seed[0].mae_T_m, *rep.per_seed[1].mae_T_m);
}

TEST_F(Forecast, EnsembleStatistics) {
  const auto cs = of(Architecture::PhysReg);
  auto rep = evaluate(cs, *traj_, split_->test_begin, traj_->size(), 2);
  ASSERT_EQ(rep.per_seed.size(), 2u);
  const double a = rep.per_seed[0].mae_T_r, b = rep.per_seed[1].mae_T_r;
  EXPECT_NEAR(rep.mean.mae_T_r, (a + b) / 2, 1e-15);
  EXPECT_NEAR(rep.std.mae_T_r, std::abs(a - b) / 2, 1e-15);
  EXPECT_GE(rep.mean.mae_T_r, std::min(a, b));
  EXPECT_LE(rep.mean.mae_T_r, std::max(a, b));

  auto reversed = cs;
  std::reverse(reversed.begin(), reversed.end());
  const auto rep2 = evaluate(reversed, *traj_, split_->test_begin, traj_->size(), 2);
  EXPECT_NEAR(rep2.mean.mae_T_r, rep.mean.mae_T_r, 1e-15);
  EXPECT_EQ(rep2.per_seed[0].seed, cs[1].seed);

  const auto csv = eval_rows_csv(rep);
  EXPECT_NE(csv.find("physreg,mean,6,2,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("physreg,std,6,2,"), std::string::npos) << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(Forecast, EvaluateRejectsEmptyInputs) {
  EXPECT_THROW(evaluate({}, *traj_, split_->test_begin, traj_->size(), 1), std::invalid_argument);
  EXPECT_THROW(evaluate(of(Architecture::Mlp), *traj_, split_->test_begin, traj_->size(), 96),
               std::invalid_argument);
}

TEST(Summarize, MeanAndPopulationStd) {
  std::vector<SeedMetrics> m{{1, 1.0, 2.0, 3.0, {}}, {2, 3.0, 2.0, 5.0, {}}};
  const auto mean = summarize(m, false);
  EXPECT_EQ(mean.mae_T_r, 2.0);
  EXPECT_EQ(*mean.mae_T_m, 4.0);
  const auto sd = summarize(m, true);
  EXPECT_EQ(sd.mae_T_r, 1.0);
  EXPECT_EQ(sd.mae_u, 0.0);
  m[1].mae_T_m.reset();
  EXPECT_FALSE(summarize(m, false).mae_T_m.has_value());
  EXPECT_THROW(summarize({}, false), std::invalid_argument);
}

TEST(EvalCsv, PersistenceRow) {
  EXPECT_EQ(persistence_row_csv(30, 6, 0.5), "persistence,mean,30,6,0.5,,,\n");
}

}  // namespace
}  // namespace thermonet
