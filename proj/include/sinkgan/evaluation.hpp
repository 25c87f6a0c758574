#ifndef SINKGAN_EVALUATION_HPP
#define SINKGAN_EVALUATION_HPP

#include "sinkgan/measure.hpp"
#include "sinkgan/sinkhorn.hpp"
#include "sinkgan/synthdata.hpp"
#include "sinkgan/training.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sinkgan {

struct GapSettings {
  double epsilon = 0.005;
  Index n_test = 1000;
  Index n_gen = 1000;
  std::uint64_t seed = 1;
  SinkhornOptions<double> sinkhorn;
};

/// Sampler drawing from T # eta for a trained model.
Sampler model_sampler(const Generator &net, const ParticleLatent &latent);

/// S_eps between n_gen model draws (seed) and n_test held-out target draws
/// (seed + 1).
DivergenceReport<double> generalization_gap_report(const Sampler &model,
                                                   const Sampler &test,
                                                   const GapSettings &settings);
double generalization_gap(const Sampler &model, const Sampler &test,
                          const GapSettings &settings);
double generalization_gap(const FittedModel &model, const Sampler &test,
                          const GapSettings &settings);

struct RatePoint {
  Index n = 0;
  double mean_dev = 0.0;
  double std_dev = 0.0;
  Index trials = 0;
};

struct RateSweepResult {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double reference_value = 0.0;  // S_eps(mu, rho_ref)
};

/// For each n, the mean over trials of |S_eps(mu, rho_n) - S_eps(mu, rho_ref)|
/// where rho_ref has 10x the largest n, and the least-squares slope of
/// log(mean) against log(n). Trial t draws rho_n with seed + t.
RateSweepResult rate_sweep(const Measure &mu, const Sampler &target,
                           std::vector<Index> ns, Index trials, double epsilon,
                           std::uint64_t seed,
                           const SinkhornOptions<double> &opts = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // sum of squared residuals
};

LinearFit least_squares(const std::vector<double> &x, const std::vector<double> &y);
double spearman(const std::vector<double> &x, const std::vector<double> &y);

struct PerturbationPoint {
  double delta = 0.0;
  double gap = 0.0;
};

struct PerturbationOptions {
  GapSettings gap;
  // Evaluate this model against each noisy target instead of retraining.
  std::optional<FittedModel> fixed_model;
  // Independent repetitions averaged per delta; repetition r offsets the
  // data, training and evaluation seeds by r.
  Index repeats = 1;
};

/// Gap per noise level, always against held-out draws of the noisy target
/// rho = N(0, delta^2 I) * rho_clean. Without a fixed model, first trains on
/// base.train_size noisy draws.
std::vector<PerturbationPoint> perturbation_sweep(const ExperimentSpec &base,
                                                  const std::vector<double> &deltas,
                                                  const TrainConfig &config,
                                                  const PerturbationOptions &options);

void write_rate_csv(std::ostream &out, const RateSweepResult &result);
RateSweepResult read_rate_csv(std::istream &in);
void write_perturbation_csv(std::ostream &out,
                            const std::vector<PerturbationPoint> &points);

}  // namespace sinkgan

#endif  // SINKGAN_EVALUATION_HPP
