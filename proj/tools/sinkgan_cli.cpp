#include "sinkgan/config.hpp"
#include "sinkgan/evaluation.hpp"
#include "sinkgan/io.hpp"
#include "sinkgan/svg.hpp"
#include "sinkgan/synthdata.hpp"
#include "sinkgan/training.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace sinkgan;

namespace {

// Runtime failures exit with 2; CLI11 parse errors exit with 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path);
  if (!out) {
    throw RuntimeFailure("cannot write " + path);
  }
  return out;
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App *cmd, ConfigArgs &args) {
  cmd->add_option("-c,--config", args.path, "Run configuration file (key = value)");
  cmd->add_option("--set", args.sets, "Override a config key, as key=value (repeatable)");
}

RunConfig resolve_config(const ConfigArgs &args) {
  RunConfig config = args.path.empty() ? default_run_config() : load_run_config(args.path);
  for (const std::string &kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

Sampler target_sampler(const RunConfig &config) {
  return make_sampler(config.experiment);
}

Measure training_target(const RunConfig &config) {
  if (!config.target_csv.empty()) {
    return read_point_csv(config.target_csv);
  }
  return target_sampler(config)(config.experiment.train_size, config.experiment.seed);
}

std::vector<double> parse_doubles(const std::string &list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const std::string cell = list.substr(pos, comma - pos);
    std::size_t used = 0;
    out.push_back(std::stod(cell, &used));
    if (used != cell.size()) {
      throw std::invalid_argument("bad number '" + cell + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_gen_data(const std::string &experiment, Index n, std::uint64_t seed,
                 double noise, const std::string &out, const ConfigArgs &cfg) {
  RunConfig config = resolve_config(cfg);
  if (!experiment.empty()) {
    check_experiment_name(experiment);
    config.experiment.name = experiment;
  }
  config.experiment.noise = noise;
  const Measure data = make_sampler(config.experiment)(n, seed);
  auto file = open_out(out);
  write_point_csv(file, data);
  return 0;
}

int cmd_fit(ConfigArgs cfg, bool fixed_latent, const std::string &resume,
            const std::optional<Index> &max_iters, const std::optional<std::uint64_t> &seed,
            std::string out, std::string metrics, bool quiet) {
  RunConfig config = resolve_config(cfg);
  if (max_iters) config.train.max_iters = *max_iters;
  if (seed) config.train.seed = *seed;
  if (fixed_latent) {
    config.train.fixed_latent = true;
    config.train.lr_particles = 0.0;
    config.train.init_scale = 1.0;
    config.train.init_mean = 0.0;
  }
  if (out.empty()) out = config.checkpoint;
  if (metrics.empty()) metrics = config.metrics;
  const Measure target = training_target(config);

  std::optional<TrainState> start;
  if (!resume.empty()) {
    const FittedModel previous = load_checkpoint(resume);
    if (previous.net.output_dim() != target.dim()) {
      throw RuntimeFailure(resume + ": model outputs dim " +
                           std::to_string(previous.net.output_dim()) +
                           ", target has dim " + std::to_string(target.dim()));
    }
    start = resume_state(previous, config.train);
  }
  const bool append = start.has_value() && std::filesystem::exists(metrics);
  std::ofstream log(metrics, append ? std::ios::app : std::ios::trunc);
  if (!log) {
    throw RuntimeFailure("cannot write " + metrics);
  }
  if (!append) {
    write_metrics_csv(log, {}, true);
  }
  const Index every = std::max<Index>(1, config.train.max_iters / 20);
  const FittedModel model =
      fit(target, config.train, std::move(start), [&](const TrainState &s) {
        write_metrics_csv(log, {s.log.back()}, false);
        log.flush();
        if (!quiet && (s.iteration % every == 0)) {
          const MetricRow &r = s.log.back();
          std::fprintf(stderr, "iter %lld  eps %.4g  S_eps %.4g  |g_theta| %.3g\n",
                       static_cast<long long>(r.iter), r.epsilon, r.sinkhorn_estimate,
                       r.grad_norm_theta);
        }
      });
  save_checkpoint(out, model);
  if (!quiet) {
    std::fprintf(stderr, "wrote %s and %s\n", out.c_str(), metrics.c_str());
  }
  return 0;
}

int cmd_eval(const ConfigArgs &cfg, const std::string &model_path, bool oracle,
             const std::string &test_csv, std::optional<double> epsilon,
             std::optional<Index> n_test, std::optional<Index> n_gen,
             std::optional<std::uint64_t> seed, const std::string &out) {
  RunConfig config = resolve_config(cfg);
  GapSettings gap = config.eval;
  if (epsilon) gap.epsilon = *epsilon;
  if (n_test) gap.n_test = *n_test;
  if (n_gen) gap.n_gen = *n_gen;
  if (seed) gap.seed = *seed;

  Sampler test = target_sampler(config);
  if (!test_csv.empty()) {
    const Measure fixed = read_point_csv(test_csv);
    gap.n_test = fixed.size();
    test = Sampler(fixed.dim(), [fixed](Index, std::uint64_t) { return fixed; });
  }
  std::optional<Sampler> model;
  if (oracle) {
    model = target_sampler(config);
  } else {
    if (model_path.empty()) {
      throw std::invalid_argument("eval needs --model or --oracle");
    }
    const FittedModel fitted = load_checkpoint(model_path);
    model = model_sampler(fitted.net, fitted.latent);
  }
  const auto report = generalization_gap_report(*model, test, gap);
  std::printf("%.10g\n", report.value);
  if (!report.converged) {
    std::fprintf(stderr, "warning: a Sinkhorn solve did not reach tol %.3g\n",
                 gap.sinkhorn.tol);
  }
  if (!out.empty()) {
    auto file = open_out(out);
    char line[256];
    std::snprintf(line, sizeof line, "gap,epsilon,n_gen,n_test,seed\n%.17g,%.17g,%lld,%lld,%llu\n",
                  report.value, gap.epsilon, static_cast<long long>(gap.n_gen),
                  static_cast<long long>(gap.n_test),
                  static_cast<unsigned long long>(gap.seed));
    file << line;
  }
  return 0;
}

int cmd_sample(const std::string &model_path, Index n, std::uint64_t seed,
               const std::string &out) {
  const FittedModel model = load_checkpoint(model_path);
  auto file = open_out(out);
  write_point_csv(file, sample_model(model.net, model.latent, n, seed));
  return 0;
}

int cmd_sweep_n(const ConfigArgs &cfg, const std::string &ns_list, Index trials,
                double epsilon, std::uint64_t seed, Index mu_size,
                std::uint64_t mu_seed, const std::string &mu_csv,
                const std::string &out) {
  const RunConfig config = resolve_config(cfg);
  const Sampler target = target_sampler(config);
  std::vector<Index> ns;
  for (double v : parse_doubles(ns_list)) {
    ns.push_back(Index(v));
  }
  Measure mu = mu_csv.empty()
                   ? gaussian_sampler(Vector<double>::Zero(target.dim()),
                                      Matrix<double>::Identity(target.dim(), target.dim()),
                                      mu_size, mu_seed)
                   : read_point_csv(mu_csv);
  SinkhornOptions<double> opts = config.eval.sinkhorn;
  const RateSweepResult result = rate_sweep(mu, target, ns, trials, epsilon, seed, opts);
  if (out.empty()) {
    write_rate_csv(std::cout, result);
  } else {
    auto file = open_out(out);
    write_rate_csv(file, result);
  }
  std::fprintf(stderr, "slope %.4f\n", result.slope);
  return 0;
}

int cmd_sweep_delta(const ConfigArgs &cfg, const std::string &deltas_list,
                    const std::string &model_path, const std::string &out) {
  const RunConfig config = resolve_config(cfg);
  PerturbationOptions options;
  options.gap = config.eval;
  if (!model_path.empty()) {
    options.fixed_model = load_checkpoint(model_path);
  }
  const auto points = perturbation_sweep(config.experiment, parse_doubles(deltas_list),
                                         config.train, options);
  if (out.empty()) {
    write_perturbation_csv(std::cout, points);
  } else {
    auto file = open_out(out);
    write_perturbation_csv(file, points);
  }
  return 0;
}

int cmd_plot(const std::vector<std::string> &inputs, std::vector<std::string> labels,
             const std::string &title, const std::string &out) {
  std::vector<ScatterSeries> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Measure m = read_point_csv(inputs[i]);
    if (m.dim() > 3) {
      throw RuntimeFailure(inputs[i] + ": dimension " + std::to_string(m.dim()) +
                           " cannot be plotted (at most 3)");
    }
    const std::string label =
        i < labels.size() ? labels[i] : std::filesystem::path(inputs[i]).filename().string();
    series.push_back(ScatterSeries{m.points(), label, ""});
  }
  ScatterOptions opts;
  opts.title = title;
  auto file = open_out(out);
  write_scatter_svg(file, series, opts);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Sinkhorn GAN with a learned particle latent"};
  app.require_subcommand(1);

  // gen-data
  auto *gen = app.add_subcommand("gen-data", "Write a synthetic point cloud as CSV");
  std::string gen_experiment;
  Index gen_n = 1000;
  std::uint64_t gen_seed = 0;
  double gen_noise = 0.0;
  std::string gen_out;
  ConfigArgs gen_cfg;
  gen->add_option("-e,--experiment", gen_experiment,
                  "spiral, swissroll, helix, mixture4 or mixture3-1d");
  gen->add_option("-n,--n", gen_n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("-s,--seed", gen_seed, "Random seed");
  gen->add_option("--noise", gen_noise, "Std of added Gaussian noise")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("-o,--out", gen_out, "Output CSV")->required();
  add_config_flags(gen, gen_cfg);

  // fit
  auto *fitc = app.add_subcommand("fit", "Train a generator and particle latent");
  ConfigArgs fit_cfg;
  bool fit_fixed = false;
  std::string fit_resume;
  std::optional<Index> fit_iters;
  std::optional<std::uint64_t> fit_seed;
  std::string fit_out;
  std::string fit_metrics;
  bool fit_quiet = false;
  add_config_flags(fitc, fit_cfg);
  fitc->add_flag("--fixed-latent", fit_fixed,
                 "Freeze N(0, I) particles (standard Sinkhorn GAN baseline)");
  fitc->add_option("--resume", fit_resume, "Continue from this checkpoint");
  fitc->add_option("--max-iters", fit_iters, "Training iterations");
  fitc->add_option("--seed", fit_seed, "Training seed");
  fitc->add_option("-o,--out", fit_out, "Checkpoint path (default from config)");
  fitc->add_option("--metrics", fit_metrics, "Metrics CSV path (default from config)");
  fitc->add_flag("-q,--quiet", fit_quiet, "No progress output");

  // eval
  auto *evalc = app.add_subcommand("eval", "Generalization gap of a trained model");
  ConfigArgs eval_cfg;
  std::string eval_model;
  bool eval_oracle = false;
  std::string eval_test_csv;
  std::optional<double> eval_eps;
  std::optional<Index> eval_n_test;
  std::optional<Index> eval_n_gen;
  std::optional<std::uint64_t> eval_seed;
  std::string eval_out;
  add_config_flags(evalc, eval_cfg);
  evalc->add_option("-m,--model", eval_model, "Checkpoint to evaluate");
  evalc->add_flag("--oracle", eval_oracle, "Use the target sampler itself as the model");
  evalc->add_option("--test-csv", eval_test_csv, "Held-out target points (default: sampled)");
  evalc->add_option("--epsilon", eval_eps, "Sinkhorn regularization");
  evalc->add_option("--n-test", eval_n_test, "Held-out target sample size");
  evalc->add_option("--n-gen", eval_n_gen, "Generated sample size");
  evalc->add_option("--seed", eval_seed, "Evaluation seed");
  evalc->add_option("-o,--out", eval_out, "Write the result as a CSV");

  // sample
  auto *samplec = app.add_subcommand("sample", "Draw points from a trained model");
  std::string sample_model_path;
  Index sample_n = 1000;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  samplec->add_option("-m,--model", sample_model_path, "Checkpoint")->required();
  samplec->add_option("-n,--n", sample_n, "Number of points")->check(CLI::PositiveNumber);
  samplec->add_option("-s,--seed", sample_seed, "Random seed");
  samplec->add_option("-o,--out", sample_out, "Output CSV")->required();

  // sweep-n
  auto *sweepn = app.add_subcommand("sweep-n", "Empirical sample-complexity rate");
  ConfigArgs sweepn_cfg;
  std::string sweepn_ns = "50,100,200,400,800,1600";
  Index sweepn_trials = 20;
  double sweepn_eps = 1.0;
  std::uint64_t sweepn_seed = 0;
  Index sweepn_mu_size = 50;
  std::uint64_t sweepn_mu_seed = 12345;
  std::string sweepn_mu_csv;
  std::string sweepn_out;
  add_config_flags(sweepn, sweepn_cfg);
  sweepn->add_option("--ns", sweepn_ns, "Comma-separated sample sizes");
  sweepn->add_option("--trials", sweepn_trials, "Trials per size")->check(CLI::PositiveNumber);
  sweepn->add_option("--epsilon", sweepn_eps, "Sinkhorn regularization");
  sweepn->add_option("--seed", sweepn_seed, "Base seed (trial t uses seed + t)");
  sweepn->add_option("--mu-size", sweepn_mu_size, "Size of the fixed N(0, I) measure");
  sweepn->add_option("--mu-seed", sweepn_mu_seed, "Seed of the fixed measure");
  sweepn->add_option("--mu-csv", sweepn_mu_csv, "Fixed measure from a CSV instead");
  sweepn->add_option("-o,--out", sweepn_out, "Output CSV (default stdout)");

  // sweep-delta
  auto *sweepd = app.add_subcommand("sweep-delta", "Gap under Gaussian target noise");
  ConfigArgs sweepd_cfg;
  std::string sweepd_deltas = "0,0.05,0.1,0.2";
  std::string sweepd_model;
  std::string sweepd_out;
  add_config_flags(sweepd, sweepd_cfg);
  sweepd->add_option("--deltas", sweepd_deltas, "Comma-separated noise levels");
  sweepd->add_option("-m,--model", sweepd_model,
                     "Evaluate this model on noisy targets instead of retraining");
  sweepd->add_option("-o,--out", sweepd_out, "Output CSV (default stdout)");

  // plot
  auto *plotc = app.add_subcommand("plot", "SVG scatter of up to 3-D point clouds");
  std::vector<std::string> plot_inputs;
  std::vector<std::string> plot_labels;
  std::string plot_title;
  std::string plot_out;
  plotc->add_option("inputs", plot_inputs, "Point CSV files (overlaid)")->required();
  plotc->add_option("--label", plot_labels, "Legend label per input");
  plotc->add_option("--title", plot_title, "Plot title");
  plotc->add_option("-o,--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      if (gen_experiment.empty() && gen_cfg.path.empty()) {
        std::cerr << "gen-data: --experiment or --config is required\n";
        return 1;
      }
      return cmd_gen_data(gen_experiment, gen_n, gen_seed, gen_noise, gen_out, gen_cfg);
    }
    if (*fitc) {
      return cmd_fit(fit_cfg, fit_fixed, fit_resume, fit_iters, fit_seed, fit_out,
                     fit_metrics, fit_quiet);
    }
    if (*evalc) {
      return cmd_eval(eval_cfg, eval_model, eval_oracle, eval_test_csv, eval_eps,
                      eval_n_test, eval_n_gen, eval_seed, eval_out);
    }
    if (*samplec) {
      return cmd_sample(sample_model_path, sample_n, sample_seed, sample_out);
    }
    if (*sweepn) {
      return cmd_sweep_n(sweepn_cfg, sweepn_ns, sweepn_trials, sweepn_eps, sweepn_seed,
                         sweepn_mu_size, sweepn_mu_seed, sweepn_mu_csv, sweepn_out);
    }
    if (*sweepd) {
      return cmd_sweep_delta(sweepd_cfg, sweepd_deltas, sweepd_model, sweepd_out);
    }
    if (*plotc) {
      return cmd_plot(plot_inputs, plot_labels, plot_title, plot_out);
    }
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
