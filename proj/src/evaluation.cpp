#include "sinkgan/evaluation.hpp"

#include "sinkgan/latent.hpp"
#include "sinkgan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sinkgan {

Sampler model_sampler(const Generator &net, const ParticleLatent &latent) {
  return Sampler(net.output_dim(), [net, latent](Index n, std::uint64_t seed) {
    return sample_model(net, latent, n, seed);
  });
}

DivergenceReport<double> generalization_gap_report(const Sampler &model,
                                                   const Sampler &test,
                                                   const GapSettings &settings) {
  if (model.dim() != test.dim()) {
    throw std::invalid_argument("generalization_gap: model dim " +
                                std::to_string(model.dim()) + ", target dim " +
                                std::to_string(test.dim()));
  }
  const Measure generated = model(settings.n_gen, settings.seed);
  const Measure held_out = test(settings.n_test, settings.seed + 1);
  return sinkhorn_divergence_report(generated, held_out, settings.epsilon,
                                    settings.sinkhorn);
}

double generalization_gap(const Sampler &model, const Sampler &test,
                          const GapSettings &settings) {
  return generalization_gap_report(model, test, settings).value;
}

double generalization_gap(const FittedModel &model, const Sampler &test,
                          const GapSettings &settings) {
  return generalization_gap(model_sampler(model.net, model.latent), test, settings);
}

LinearFit least_squares(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares: need >= 2 matched points");
  }
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("least_squares: x values are all equal");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residual += r * r;
  }
  return fit;
}

namespace {

std::vector<double> ranks(const std::vector<double> &v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
      ++j;
    }
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      r[order[t]] = avg;
    }
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman: need >= 2 matched points");
  }
  return pearson(ranks(x), ranks(y));
}

RateSweepResult rate_sweep(const Measure &mu, const Sampler &target,
                           std::vector<Index> ns, Index trials, double epsilon,
                           std::uint64_t seed, const SinkhornOptions<double> &opts) {
  if (ns.size() < 2) {
    throw std::invalid_argument("rate_sweep: need at least 2 sample sizes");
  }
  if (trials < 1) {
    throw std::invalid_argument("rate_sweep: trials must be >= 1");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1])) {
      throw std::invalid_argument("rate_sweep: sizes must be positive and increasing");
    }
  }
  if (mu.dim() != target.dim()) {
    throw std::invalid_argument("rate_sweep: dimension mismatch");
  }
  RateSweepResult result;
  const Measure reference = target(10 * ns.back(), seed + std::uint64_t(trials));
  result.reference_value = sinkhorn_divergence(mu, reference, epsilon, opts);

  std::vector<double> log_n;
  std::vector<double> log_mean;
  for (const Index n : ns) {
    std::vector<double> dev(static_cast<std::size_t>(trials));
    for (Index t = 0; t < trials; ++t) {
      const Measure sample = target(n, seed + std::uint64_t(t));
      dev[std::size_t(t)] =
          std::abs(sinkhorn_divergence(mu, sample, epsilon, opts) -
                   result.reference_value);
    }
    RatePoint p;
    p.n = n;
    p.trials = trials;
    p.mean_dev = std::accumulate(dev.begin(), dev.end(), 0.0) / double(trials);
    if (trials > 1) {
      double ss = 0.0;
      for (double d : dev) {
        ss += (d - p.mean_dev) * (d - p.mean_dev);
      }
      p.std_dev = std::sqrt(ss / double(trials - 1));
    }
    result.points.push_back(p);
    if (p.mean_dev > 0.0) {
      log_n.push_back(std::log(double(n)));
      log_mean.push_back(std::log(p.mean_dev));
    }
  }
  if (log_n.size() >= 2) {
    const LinearFit fit = least_squares(log_n, log_mean);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
  } else {
    result.slope = std::nan("");
    result.intercept = std::nan("");
  }
  return result;
}

std::vector<PerturbationPoint> perturbation_sweep(const ExperimentSpec &base,
                                                  const std::vector<double> &deltas,
                                                  const TrainConfig &config,
                                                  const PerturbationOptions &options) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] >= 0.0) || (i > 0 && deltas[i] < deltas[i - 1])) {
      throw std::invalid_argument("perturbation_sweep: deltas must be >= 0 and increasing");
    }
  }
  if (options.repeats < 1) {
    throw std::invalid_argument("perturbation_sweep: repeats must be >= 1");
  }
  std::vector<PerturbationPoint> out;
  for (const double delta : deltas) {
    ExperimentSpec noisy_spec = base;
    noisy_spec.noise = delta;
    const Sampler noisy = make_sampler(noisy_spec);
    PerturbationPoint p;
    p.delta = delta;
    for (Index r = 0; r < options.repeats; ++r) {
      GapSettings gap = options.gap;
      gap.seed += std::uint64_t(r);
      double g = 0.0;
      if (options.fixed_model) {
        g = generalization_gap(*options.fixed_model, noisy, gap);
      } else {
        TrainConfig c = config;
        c.seed += std::uint64_t(r);
        const FittedModel model = fit(noisy(base.train_size, base.seed + std::uint64_t(r)), c);
        g = generalization_gap(model, noisy, gap);
      }
      p.gap += g / double(options.repeats);
    }
    out.push_back(p);
  }
  return out;
}

void write_rate_csv(std::ostream &out, const RateSweepResult &result) {
  std::ostringstream s;
  s.precision(17);
  s << "n,mean_dev,std_dev,trials\n";
  for (const RatePoint &p : result.points) {
    s << p.n << ',' << p.mean_dev << ',' << p.std_dev << ',' << p.trials << '\n';
  }
  s << "slope=" << result.slope << ",intercept=" << result.intercept << '\n';
  out << s.str();
}

RateSweepResult read_rate_csv(std::istream &in) {
  RateSweepResult result;
  std::string line;
  if (!std::getline(in, line) || line != "n,mean_dev,std_dev,trials") {
    throw std::runtime_error("rate csv: missing header");
  }
  int lineno = 1;
  bool footer = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    if (line.rfind("slope=", 0) == 0) {
      const auto comma = line.find(",intercept=");
      if (comma == std::string::npos) {
        throw std::runtime_error("rate csv line " + std::to_string(lineno) +
                                 ": malformed footer");
      }
      result.slope = std::stod(line.substr(6, comma - 6));
      result.intercept = std::stod(line.substr(comma + 11));
      footer = true;
      continue;
    }
    std::istringstream row(line);
    RatePoint p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> p.n >> c1 >> p.mean_dev >> c2 >> p.std_dev >> c3 >> p.trials) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw std::runtime_error("rate csv line " + std::to_string(lineno) +
                               ": expected n,mean_dev,std_dev,trials");
    }
    result.points.push_back(p);
  }
  if (!footer) {
    throw std::runtime_error("rate csv: missing slope footer");
  }
  return result;
}

void write_perturbation_csv(std::ostream &out,
                            const std::vector<PerturbationPoint> &points) {
  std::ostringstream s;
  s.precision(17);
  s << "delta,gap\n";
  for (const auto &p : points) {
    s << p.delta << ',' << p.gap << '\n';
  }
  out << s.str();
}

}  // namespace sinkgan
