#include "sinkgan/evaluation.hpp"
#include "sinkgan/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sinkgan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string &args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("cd '") + dir_.string() + "' && '" + SINKGAN_CLI_PATH +
                            "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path path(const std::string &name) const { return dir_ / name; }

  static std::string config(const std::string &name) {
    return (fs::path(SINKGAN_CONFIG_DIR) / name).string();
  }

  // Small network so a fit finishes in well under a second.
  static std::string tiny() {
    return "--set hidden=16 --set activations=tanh --set particles=50 --set batch_size=20 "
           "--set epsilon0=0.1 --set epsilon_floor=0.1 --set lr_generator=1e-2 "
           "--set train_size=200 --set eval_n_test=200 --set eval_n_gen=200 ";
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string &s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const Result r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gen-data"), std::string::npos);
  EXPECT_NE(r.out.find("sweep-delta"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("no-such-command").code, 1);
  EXPECT_EQ(run("gen-data -o x.csv").code, 1);
  EXPECT_EQ(run("fit --set bogus=1").code, 1);
}

TEST_F(Cli, RuntimeFailuresExitTwo) {
  const Result r = run("sample -m missing.sgan -o out.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.sgan"), std::string::npos) << r.err;
}

TEST_F(Cli, GenDataIsDeterministic) {
  ASSERT_EQ(run("gen-data -e spiral -n 1000 -s 3 -o a.csv").code, 0);
  ASSERT_EQ(run("gen-data -e spiral -n 1000 -s 3 -o b.csv").code, 0);
  const std::string a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  const sinkgan::Measure m = sinkgan::read_point_csv(path("a.csv"));
  EXPECT_EQ(m.size(), 1000);
  EXPECT_EQ(m.dim(), 2);
  ASSERT_EQ(run("gen-data -e spiral -n 1000 -s 4 -o c.csv").code, 0);
  EXPECT_NE(a, slurp(path("c.csv")));
}

TEST_F(Cli, GenDataRejectsUnknownExperiment) {
  const Result r = run("gen-data -e nosuch -o a.csv");
  EXPECT_NE(r.code, 0);
  for (const char *name : {"spiral", "swissroll", "helix", "mixture4"}) {
    EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
  }
  EXPECT_FALSE(fs::exists(path("a.csv")));
}

TEST_F(Cli, GenDataFromConfig) {
  ASSERT_EQ(run("gen-data -c " + config("swissroll.cfg") + " -n 50 -o s.csv").code, 0);
  EXPECT_EQ(sinkgan::read_point_csv(path("s.csv")).dim(), 3);
}

TEST_F(Cli, FitWritesCheckpointAndMetrics) {
  const Result r = run("fit -q -c " + config("spiral.cfg") + " " + tiny() +
                    "--max-iters 10 -o m.sgan --metrics m.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const sinkgan::FittedModel m = sinkgan::load_checkpoint(path("m.sgan"));
  EXPECT_EQ(m.iteration, 10);
  EXPECT_EQ(m.latent.particles.rows(), 50);
  std::ifstream metrics(path("m.csv"));
  const auto rows = sinkgan::read_metrics_csv(metrics);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows.front().iter, 0);
  EXPECT_EQ(rows.back().iter, 9);
}

TEST_F(Cli, FitUsesShippedSpiralPreset) {
  // The full preset network, just long enough to check it runs.
  const Result r = run("fit -q -c " + config("spiral.cfg") + " --max-iters 10 -o p.sgan --metrics p.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream metrics(path("p.csv"));
  EXPECT_EQ(sinkgan::read_metrics_csv(metrics).size(), 10u);
  EXPECT_EQ(sinkgan::load_checkpoint(path("p.sgan")).net.num_params(),
            1 * 256 + 256 + 256 * 1024 + 1024 + 1024 * 256 + 256 + 256 * 256 + 256 + 256 * 2 + 2);
}

TEST_F(Cli, FixedLatentKeepsParticles) {
  ASSERT_EQ(run("fit -q " + tiny() + "--fixed-latent --max-iters 1 --seed 7 -o a.sgan --metrics a.csv").code, 0);
  ASSERT_EQ(run("fit -q " + tiny() + "--fixed-latent --max-iters 8 --seed 7 -o b.sgan --metrics b.csv").code, 0);
  const auto a = sinkgan::load_checkpoint(path("a.sgan"));
  const auto b = sinkgan::load_checkpoint(path("b.sgan"));
  EXPECT_EQ(a.latent.particles, b.latent.particles);
  EXPECT_NE(a.net.params(), b.net.params());
}

TEST_F(Cli, ResumeContinuesCounters) {
  ASSERT_EQ(run("fit -q " + tiny() + "--max-iters 5 -o r.sgan --metrics r.csv").code, 0);
  ASSERT_EQ(run("fit -q " + tiny() + "--resume r.sgan --max-iters 5 -o r2.sgan --metrics r.csv").code, 0);
  EXPECT_EQ(sinkgan::load_checkpoint(path("r2.sgan")).iteration, 10);
  std::ifstream metrics(path("r.csv"));
  const auto rows = sinkgan::read_metrics_csv(metrics);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].iter, sinkgan::Index(i));
}

TEST_F(Cli, ResumeRejectsWrongDimension) {
  ASSERT_EQ(run("fit -q " + tiny() + "--max-iters 2 -o r.sgan --metrics r.csv").code, 0);
  const Result r = run("fit -q " + tiny() + "--set experiment=helix --resume r.sgan --max-iters 2");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, EvalSampleAndPlot) {
  ASSERT_EQ(run("fit -q " + tiny() + "--max-iters 5 -o m.sgan --metrics m.csv").code, 0);
  const Result e = run("eval " + tiny() + "-m m.sgan --epsilon 1 --seed 3 -o gap.csv");
  ASSERT_EQ(e.code, 0) << e.err;
  const double gap = std::stod(e.out);
  EXPECT_GT(gap, 0.0);
  EXPECT_EQ(run("eval " + tiny() + "-m m.sgan --epsilon 1 --seed 3").out, e.out);
  EXPECT_NE(slurp(path("gap.csv")).find("gap,epsilon,n_gen,n_test,seed"), std::string::npos);

  const Result oracle = run("eval " + tiny() + "--oracle --epsilon 1 --seed 3");
  ASSERT_EQ(oracle.code, 0);
  EXPECT_LT(std::stod(oracle.out), gap);
  EXPECT_EQ(run("eval " + tiny()).code, 1);

  ASSERT_EQ(run("sample -m m.sgan -n 300 -s 1 -o g.csv").code, 0);
  EXPECT_EQ(sinkgan::read_point_csv(path("g.csv")).size(), 300);
  ASSERT_EQ(run("gen-data -e spiral -n 300 -o t.csv").code, 0);

  const Result fixed = run("eval " + tiny() + "-m m.sgan --epsilon 1 --test-csv t.csv");
  ASSERT_EQ(fixed.code, 0) << fixed.err;

  ASSERT_EQ(run("plot t.csv g.csv --label real --label generated --title demo -o p.svg").code, 0);
  const std::string svg = slurp(path("p.svg"));
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("generated"), std::string::npos);
  EXPECT_EQ(count_lines(svg) > 600, true);
}

TEST_F(Cli, PlotRejectsHighDimensions) {
  {
    std::ofstream f(path("four.csv"));
    f << "1,2,3,4\n";
  }
  EXPECT_EQ(run("plot four.csv -o p.svg").code, 2);
}

TEST_F(Cli, SweepN) {
  const Result r = run("sweep-n --set experiment=mixture4 --ns 20,40,80 --trials 3 --epsilon 1 -o rate.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("rate.csv"));
  const auto result = sinkgan::read_rate_csv(in);
  EXPECT_EQ(result.points.size(), 3u);
  EXPECT_NE(r.err.find("slope"), std::string::npos);
  EXPECT_EQ(run("sweep-n --ns 20,abc").code, 1);
}

TEST_F(Cli, SweepDeltaWithFixedModel) {
  ASSERT_EQ(run("fit -q " + tiny() + "--max-iters 3 -o m.sgan --metrics m.csv").code, 0);
  const Result r = run("sweep-delta " + tiny() + "--set eval_epsilon=1 --deltas 0,0.3 -m m.sgan");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("delta,gap\n", 0), 0u);
  EXPECT_EQ(count_lines(r.out), 3u);
}

TEST_F(Cli, SweepNOnSpiralPresetHasRootNRate) {
  const Result r = run("sweep-n -c " + config("spiral.cfg") + " -o rate.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("rate.csv"));
  const auto result = sinkgan::read_rate_csv(in);
  ASSERT_EQ(result.points.size(), 6u);
  EXPECT_EQ(result.points.back().n, 1600);
  EXPECT_GE(result.slope, -0.65);
  EXPECT_LE(result.slope, -0.35);
}
