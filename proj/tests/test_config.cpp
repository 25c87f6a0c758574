#include "sinkgan/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace sinkgan;

namespace {

RunConfig parse(const std::string &text) {
  std::istringstream in(text);
  return parse_run_config(in, "test.cfg");
}

std::string serialize(const RunConfig &c) {
  std::ostringstream out;
  write_run_config(out, c);
  return out.str();
}

}  // namespace

TEST(Config, DefaultsFollowSpiralSetup) {
  const RunConfig c = default_run_config();
  EXPECT_EQ(c.experiment.name, "spiral");
  EXPECT_EQ(c.train.batch_size, 100);
  EXPECT_EQ(c.train.particles, 1000);
  EXPECT_EQ(c.train.lr_generator, 1e-4);
  EXPECT_EQ(c.train.lr_particles, 1e-3);
  EXPECT_EQ(c.train.epsilon_floor, 0.005);
  EXPECT_NE(c.eval.seed, c.train.seed);
}

TEST(Config, ParsesValuesAndComments) {
  const RunConfig c = parse(
      "# comment\n"
      "experiment = swissroll\n"
      "\n"
      "hidden = 16, 32\n"
      "activations = relu, tanh   # trailing comment\n"
      "lr_generator=5e-5\n"
      "schedule = block\n"
      "gen_iters = 50\n"
      "fixed_latent = true\n"
      "target_batch = 0\n"
      "swissroll_means = 0.1:0.2, 0.3:0.4\n"
      "eval_epsilon = 0.5\n"
      "checkpoint = out/model.sgan\n");
  EXPECT_EQ(c.experiment.name, "swissroll");
  EXPECT_EQ(c.train.hidden, (std::vector<Index>{16, 32}));
  EXPECT_EQ(c.train.activations, (std::vector<Activation>{Activation::relu, Activation::tanh}));
  EXPECT_EQ(c.train.lr_generator, 5e-5);
  EXPECT_EQ(c.train.schedule, ScheduleMode::block);
  EXPECT_TRUE(c.train.fixed_latent);
  ASSERT_TRUE(c.train.target_batch.has_value());
  EXPECT_EQ(*c.train.target_batch, 0);
  ASSERT_EQ(c.experiment.swissroll_means.size(), 2u);
  EXPECT_EQ(c.experiment.swissroll_means[1][0], 0.3);
  EXPECT_EQ(c.eval.epsilon, 0.5);
  EXPECT_EQ(c.checkpoint, "out/model.sgan");
}

TEST(Config, ErrorsCarrySourceAndLine) {
  try {
    parse("batch_size = 10\nno_such_key = 1\n");
    FAIL();
  } catch (const std::runtime_error &e) {
    EXPECT_NE(std::string(e.what()).find("test.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("batch_size = ten\n"), std::runtime_error);
  EXPECT_THROW(parse("batch_size\n"), std::runtime_error);
  EXPECT_THROW(parse("optimizer = rmsprop\n"), std::runtime_error);
  EXPECT_THROW(parse("fixed_latent = maybe\n"), std::runtime_error);
  EXPECT_THROW(parse("experiment = nosuch\n"), std::runtime_error);
}

TEST(Config, RoundTrip) {
  RunConfig c = parse(
      "experiment = helix\nhelix_turns = 3.5\nnoise = 0.01\nhidden = 7\n"
      "activations = tanh\nepsilon0 = 2\nepsilon_decay = 0.9\nseed = 77\n"
      "target_batch = 250\nsinkhorn_relaxation = 1.8\neval_n_gen = 321\n"
      "spiral_means = 0.2, 0.4\nlr_generator = 0.1\n");
  const std::string text = serialize(c);
  const RunConfig back = parse(text);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(back.experiment.helix_turns, 3.5);
  EXPECT_EQ(back.train.lr_generator, 0.1);
  EXPECT_EQ(back.train.epsilon_decay, 0.9);
  EXPECT_EQ(*back.train.target_batch, 250);
  EXPECT_EQ(back.eval.n_gen, 321);
  EXPECT_EQ(back.experiment.spiral_means, (std::vector<double>{0.2, 0.4}));
  // Default target batch serializes as "auto".
  EXPECT_NE(serialize(default_run_config()).find("target_batch = auto"), std::string::npos);
}

TEST(Config, EveryKeyIsWritten) {
  const std::string text = "\n" + serialize(default_run_config());
  for (const auto &key : config_keys()) {
    EXPECT_NE(text.find("\n" + key + " = "), std::string::npos) << key;
  }
}

TEST(Config, OverridesApply) {
  RunConfig c = default_run_config();
  set_config_value(c, "max_iters", "10");
  set_config_value(c, "optimizer", "sgd");
  EXPECT_EQ(c.train.max_iters, 10);
  EXPECT_EQ(c.train.optimizer, Optimizer::sgd);
  EXPECT_THROW(set_config_value(c, "bogus", "1"), std::invalid_argument);
}

TEST(Config, ShippedPresetsParse) {
  for (const char *name : {"spiral", "swissroll", "helix"}) {
    const auto path = std::filesystem::path(SINKGAN_CONFIG_DIR) / (std::string(name) + ".cfg");
    const RunConfig c = load_run_config(path);
    EXPECT_EQ(c.experiment.name, name);
    EXPECT_NO_THROW(c.train.validate());
  }
}

TEST(Config, PresetsCarryPublishedHyperparameters) {
  const auto dir = std::filesystem::path(SINKGAN_CONFIG_DIR);
  const RunConfig s = load_run_config(dir / "spiral.cfg");
  EXPECT_EQ(s.train.lr_generator, 1e-4);
  EXPECT_EQ(s.train.lr_particles, 1e-3);
  EXPECT_EQ(s.train.particles, 1000);
  EXPECT_EQ(s.train.batch_size, 100);
  EXPECT_EQ(s.train.epsilon_floor, 0.005);
  EXPECT_EQ(s.experiment.train_size, 1000);
  EXPECT_LE(s.train.max_iters, 10000);
  const RunConfig r = load_run_config(dir / "swissroll.cfg");
  EXPECT_EQ(r.train.lr_generator, 5e-5);
  EXPECT_EQ(r.train.lr_particles, 1e-4);
  EXPECT_EQ(r.train.schedule, ScheduleMode::block);
  EXPECT_EQ(r.train.gen_iters, 50);
  EXPECT_EQ(r.train.latent_iters, 20);
  EXPECT_EQ(r.train.epsilon0, 2.0);
  EXPECT_EQ(r.train.epsilon_decay, 0.9);
  EXPECT_EQ(r.train.epsilon_period, 50);
  EXPECT_EQ(r.train.epsilon_floor, 1e-3);
  EXPECT_EQ(r.train.latent_dim, 2);
}
