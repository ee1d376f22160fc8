#include <gtest/gtest.h>

#include <cstdlib>

#include "thermonet/run_config.hpp"

namespace thermonet {
namespace {

RunConfig from_text(const std::string& text) {
  RunConfig c;
  apply_settings(c, parse_config_text(text));
  return c;
}

TEST(RunConfig, DefaultsAreValid) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.train.seeds.size(), 20u);
  EXPECT_EQ(c.simulation.n_days, 125);
}

TEST(RunConfig, ManifestRoundTrip) {
  RunConfig c;
  apply_setting(c, "thermal.R_ra", "4.25");
  apply_setting(c, "train.seeds", "1-3,9");
  apply_setting(c, "train.trunk_hidden", "32,16");
  apply_setting(c, "experiment.lambda.physnet", "0.1");
  apply_setting(c, "experiment.metric", "path-average");
  apply_setting(c, "experiment.architectures", "physnet,mlp");
  apply_setting(c, "ambient.noise_sigma", "0.1");
  apply_setting(c, "paths.output_dir", "results dir");
  const std::string text = run_config_to_text(c);
  const RunConfig back = from_text(text);
  EXPECT_EQ(run_config_to_text(back), text);
  EXPECT_EQ(back.simulation.thermal.R_ra, 4.25);
  EXPECT_EQ(back.train.seeds, (std::vector<std::uint64_t>{1, 2, 3, 9}));
  EXPECT_EQ(back.train.model.trunk_hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(back.experiment.fixed_lambda.at(Architecture::PhysNet), 0.1);
  EXPECT_EQ(back.experiment.fixed_lambda.count(Architecture::PhysReg), 0u);
  EXPECT_EQ(back.experiment.metric, HorizonMetric::PathAverage);
  EXPECT_EQ(back.experiment.architectures.size(), 2u);
  EXPECT_EQ(back.output_dir, "results dir");
}

TEST(RunConfig, CommentsAndBlankLines) {
  const auto kv = parse_config_text("# header\n\n train.epochs = 12  # short run\nsim.days=30\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "train.epochs");
  EXPECT_EQ(kv[0].second, "12");
  const auto c = from_text("train.epochs = 12\nsim.days = 30\n");
  EXPECT_EQ(c.train.epochs, 12);
  EXPECT_EQ(c.simulation.n_days, 30);
}

TEST(RunConfig, ErrorsAreConfigErrors) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "thermal.R_xx", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "train.epochs", "many"), ConfigError);
  EXPECT_THROW(apply_setting(c, "train.arch", "mlp"), ConfigError);
  EXPECT_THROW(apply_setting(c, "experiment.architectures", "lstm"), ConfigError);
  try {
    parse_config_text("train.epochs = 3\nnot a setting\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, ValidationCatchesBadValues) {
  auto bad = [](const char* key, const char* value) {
    RunConfig c;
    apply_setting(c, key, value);
    EXPECT_THROW(c.validate(), ConfigError) << key << " = " << value;
  };
  bad("thermal.R_ra", "-1");
  bad("thermal.C_m", "0");
  bad("thermal.u_max", "0");
  bad("train.epochs", "0");
  bad("train.learning_rate", "0");
  bad("sim.days", "0");
  bad("experiment.test_days", "0");
  bad("experiment.jobs", "0");
}

TEST(SeedList, Ranges) {
  EXPECT_EQ(parse_seed_list("1-20").size(), 20u);
  EXPECT_EQ(parse_seed_list("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(parse_seed_list("1,4, 9"), (std::vector<std::uint64_t>{1, 4, 9}));
  EXPECT_EQ(parse_seed_list("1-3,7"), (std::vector<std::uint64_t>{1, 2, 3, 7}));
  EXPECT_THROW(parse_seed_list("5-2"), std::invalid_argument);
  EXPECT_THROW(parse_seed_list(""), std::invalid_argument);
  EXPECT_THROW(parse_seed_list("a"), std::invalid_argument);
}

TEST(OutputRoot, ReadsEnvironment) {
  ::unsetenv("THERMONET_OUTPUT_ROOT");
  EXPECT_EQ(output_root("fallback"), "fallback");
  ::setenv("THERMONET_OUTPUT_ROOT", "/tmp/elsewhere", 1);
  EXPECT_EQ(output_root("fallback"), "/tmp/elsewhere");
  ::unsetenv("THERMONET_OUTPUT_ROOT");
}

}  // namespace
}  // namespace thermonet
