#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"
#include "thermonet/checkpoint.hpp"
#include "thermonet/errors.hpp"

namespace thermonet {
namespace {

using testing::tiny_split;
using testing::tiny_train;
using testing::tiny_trajectory;

class Training : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    traj_ = new Trajectory(tiny_trajectory());
    split_ = new DatasetSplit(tiny_split(*traj_));
  }
  static void TearDownTestSuite() {
    delete split_;
    delete traj_;
  }
  static PhysicsParams phys() { return params_from_rc(ThermalParams{}); }

  static Trajectory* traj_;
  static DatasetSplit* split_;
};

Trajectory* Training::traj_ = nullptr;
DatasetSplit* Training::split_ = nullptr;

TEST_F(Training, StepCountAndHistory) {
  auto cfg = tiny_train(Architecture::PhysReg);
  const auto r = train_one(cfg, 1, split_->train, phys(), 2.0);
  const std::size_t linked = split_->train.linked_positions().size();
  EXPECT_EQ(linked, 6u * 48 - 7);
  const auto batches = static_cast<std::int64_t>((linked + 127) / 128);
  EXPECT_EQ(r.optimizer_steps, 3 * batches);
  ASSERT_EQ(r.history.size(), 3u);
  for (const auto& h : r.history) {
    EXPECT_TRUE(std::isfinite(h.total));
    EXPECT_NEAR(h.total, h.L_reg + h.lambda * h.L_phys, 1e-9 * h.total);
  }
  EXPECT_LT(r.history.back().L_reg, r.history.front().L_reg);
  EXPECT_EQ(r.checkpoint.seed, 1u);
  EXPECT_EQ(r.checkpoint.train_days, 6);
  EXPECT_EQ(r.checkpoint.u_max, 2.0);
  EXPECT_TRUE(r.checkpoint.normalizer == *split_->train.normalizer);
}

TEST_F(Training, PhysicsCoefficientsMoveOnlyWhenTrainable) {
  auto cfg = tiny_train(Architecture::PhysNet, 1.0);
  const auto moved = train_one(cfg, 1, split_->train, phys(), 2.0).checkpoint.physics;
  EXPECT_NE(moved.a11(), phys().a11());
  EXPECT_EQ(moved.a21(), phys().a21());
  EXPECT_EQ(moved.a22(), phys().a22());
  cfg.train_physics = false;
  const auto fixed = train_one(cfg, 1, split_->train, phys(), 2.0).checkpoint.physics;
  EXPECT_EQ(fixed.values, phys().values);
}

TEST_F(Training, DeterministicForFixedSeed) {
  for (auto a : {Architecture::PhysNet, Architecture::PhysReg, Architecture::Mlp}) {
    const auto cfg = tiny_train(a);
    const auto r1 = train_one(cfg, 2, split_->train, phys(), 2.0);
    const auto r2 = train_one(cfg, 2, split_->train, phys(), 2.0);
    EXPECT_EQ(checkpoint_to_text(r1.checkpoint), checkpoint_to_text(r2.checkpoint)) << to_string(a);
    const auto r3 = train_one(cfg, 3, split_->train, phys(), 2.0);
    EXPECT_NE(checkpoint_to_text(r1.checkpoint), checkpoint_to_text(r3.checkpoint));
  }
}

TEST_F(Training, PhysRegWithoutPhysicsTermEqualsMlp) {
  const auto reg = train_one(tiny_train(Architecture::PhysReg, 0.0), 5, split_->train, phys(), 2.0);
  const auto mlp = train_one(tiny_train(Architecture::Mlp), 5, split_->train, phys(), 2.0);
  std::vector<std::size_t> all(split_->test.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Eigen::MatrixXd x = split_->test.feature_matrix(all);
  const Eigen::MatrixXd a = reg.checkpoint.model->predict(x);
  const Eigen::MatrixXd b = mlp.checkpoint.model->predict(x);
  EXPECT_EQ(a.topRows(2), b);
  EXPECT_EQ(reg.history.back().L_reg, mlp.history.back().L_reg);
}

TEST_F(Training, EnsembleMatchesSingleRunsInSeedOrder) {
  auto cfg = tiny_train(Architecture::PhysReg);
  cfg.seeds = {4, 2, 9};
  const auto out = train_ensemble(cfg, split_->train, phys(), 2.0, 3);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out[i].seed, cfg.seeds[i]);
    ASSERT_TRUE(out[i].result.has_value());
    const auto ref = train_one(cfg, cfg.seeds[i], split_->train, phys(), 2.0);
    EXPECT_EQ(checkpoint_to_text(out[i].result->checkpoint), checkpoint_to_text(ref.checkpoint));
  }
}

TEST_F(Training, DivergenceIsReportedPerSeed) {
  Dataset bad = split_->train;
  bad.samples[40].target_T_r_next = std::numeric_limits<double>::quiet_NaN();
  auto cfg = tiny_train(Architecture::PhysReg);
  EXPECT_THROW(train_one(cfg, 1, bad, phys(), 2.0), DivergenceError);
  const auto out = train_ensemble(cfg, bad, phys(), 2.0, 2);
  for (const auto& o : out) {
    EXPECT_FALSE(o.result.has_value());
    EXPECT_NE(o.error.find("non-finite"), std::string::npos) << o.error;
  }
}

TEST_F(Training, FlooredCouplingIsProjected) {
  auto pp = phys();
  pp.values[1] = 0.0;
  const auto r = train_one(tiny_train(Architecture::PhysNet), 1, split_->train, pp, 2.0);
  EXPECT_GE(r.clamp_events, 1);
  EXPECT_GE(std::abs(r.checkpoint.physics.a12()), pp.a12_floor);
}

TEST_F(Training, RejectsBadConfigurationAndData) {
  auto cfg = tiny_train(Architecture::PhysReg);
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = tiny_train(Architecture::PhysReg);
  cfg.seeds = {1, 1};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = tiny_train(Architecture::PhysReg);
  cfg.lambda = std::numeric_limits<double>::infinity();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = tiny_train(Architecture::PhysReg);
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);

  cfg = tiny_train(Architecture::PhysReg);
  cfg.model.depth = 3;
  EXPECT_THROW(train_one(cfg, 1, split_->train, phys(), 2.0), std::invalid_argument);
  Dataset no_norm = split_->train;
  no_norm.normalizer.reset();
  EXPECT_THROW(train_one(tiny_train(Architecture::Mlp), 1, no_norm, phys(), 2.0),
               std::invalid_argument);
  EXPECT_EQ(default_seeds().size(), 20u);
  EXPECT_EQ(default_seeds().back(), 20u);
}

}  // namespace
}  // namespace thermonet
