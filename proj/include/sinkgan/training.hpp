#ifndef SINKGAN_TRAINING_HPP
#define SINKGAN_TRAINING_HPP

#include "sinkgan/generator.hpp"
#include "sinkgan/latent.hpp"
#include "sinkgan/measure.hpp"
#include "sinkgan/sinkhorn.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace sinkgan {

enum class Optimizer { sgd, adam };
enum class ScheduleMode { simultaneous, block };

struct TrainConfig {
  // Generator architecture: [latent_dim, hidden..., target dim].
  Index latent_dim = 1;
  std::vector<Index> hidden = {256, 1024, 256, 256};
  std::vector<Activation> activations = {Activation::relu, Activation::relu,
                                         Activation::tanh, Activation::identity};

  Index batch_size = 100;  // l
  Index particles = 1000;  // m
  double delta = 0.05;
  double init_scale = 1.0;
  double init_mean = 0.0;

  double epsilon0 = 0.005;
  double epsilon_floor = 0.005;
  double epsilon_decay = 1.0;
  Index epsilon_period = 50;

  double lr_generator = 1e-4;  // alpha_1
  double lr_particles = 1e-3;  // alpha_2
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  Index max_iters = 1000;
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 10000;
  double sinkhorn_relaxation = 1.0;
  std::uint64_t seed = 0;

  // Target points per step: nullopt = batch_size, 0 = the whole training set.
  std::optional<Index> target_batch;

  ScheduleMode schedule = ScheduleMode::simultaneous;
  Index gen_iters = 50;
  Index latent_iters = 20;

  // Particles drawn once and never moved (standard Sinkhorn GAN baseline).
  bool fixed_latent = false;
  // Use only the cross potential, as in the plain algorithm listing.
  bool biased_gradient = false;

  void validate() const;
  std::vector<Index> layer_dims(Index target_dim) const;
  Index effective_target_batch(Index n) const;
};

/// eps0 * decay^floor(step / period), clamped below at the floor.
double epsilon_schedule(Index step, const TrainConfig &config);

struct AdamMoments {
  Vector<double> first;
  Vector<double> second;
  std::int64_t step = 0;
};

/// One bias-corrected Adam step in place; increments moments.step.
void adam_update(Vector<double> &params, const Vector<double> &grad,
                 AdamMoments &moments, double lr, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

struct MetricRow {
  Index iter = 0;
  double epsilon = 0.0;
  double sinkhorn_estimate = 0.0;
  double grad_norm_theta = 0.0;
  double grad_norm_particles = 0.0;
  double wall_ms = 0.0;
};

struct TrainState {
  Generator net;
  ParticleLatent latent;
  AdamMoments moments;
  Index iteration = 0;
  Index generator_steps = 0;
  double epsilon = 0.0;
  Index rejected_steps = 0;
  std::vector<MetricRow> log;
  // Last solves, reused to warm-start the next step.
  std::optional<SinkhornPotentials<double>> cross_warm;
  std::optional<SinkhornPotentials<double>> self_warm;
};

TrainState init_state(const TrainConfig &config, Index target_dim);

struct GradientSettings {
  double epsilon = 0.005;
  SinkhornOptions<double> sinkhorn;
  bool biased = false;
};

struct ObjectiveGradients {
  Vector<double> theta;           // (1/l) sum_j vjp_params(z_j, g_j)
  Matrix<double> particles;       // m x k, (1/l) sum over occurrences
  Matrix<double> cotangents;      // l x d, g_j
  double divergence_estimate = 0.0;  // S_eps(T#batch, target), NaN if skipped
  bool converged = true;
  std::optional<SinkhornPotentials<double>> cross;
  std::optional<SinkhornPotentials<double>> self;
};

/// Gradients of S_eps(T_theta # batch, target) in theta and in the particles,
/// with cotangent g_j = grad u_cross(x_j) - grad a_self(x_j) at x_j = T(z_j).
ObjectiveGradients objective_gradients(
    const Generator &net, const ParticleLatent &latent, const Measure &target,
    const LatentBatch &batch, const GradientSettings &settings,
    const std::optional<SinkhornPotentials<double>> &cross_warm = std::nullopt,
    const std::optional<SinkhornPotentials<double>> &self_warm = std::nullopt,
    const std::optional<double> &target_self_ot = std::nullopt);

Vector<double> objective_gradient_theta(const Generator &net,
                                        const ParticleLatent &latent,
                                        const Measure &target,
                                        const LatentBatch &batch,
                                        const GradientSettings &settings);

Matrix<double> objective_gradient_particles(const Generator &net,
                                            const ParticleLatent &latent,
                                            const Measure &target,
                                            const LatentBatch &batch,
                                            const GradientSettings &settings);

/// S_eps(T # batch, target) solved from scratch; the objective the gradients
/// above differentiate.
double batch_objective(const Generator &net, const LatentBatch &batch,
                       const Measure &target, const GradientSettings &settings);

/// One iteration of joint training. Steps whose gradients or updates are
/// non-finite leave the model untouched and only advance the counter.
TrainState train_step(TrainState state, const Measure &target,
                      const TrainConfig &config);

struct FittedModel {
  Generator net;
  ParticleLatent latent;
  std::vector<MetricRow> log;
  Index iteration = 0;
  Index generator_steps = 0;
  AdamMoments moments;
};

using StepCallback = std::function<void(const TrainState &)>;

/// Runs config.max_iters steps, from scratch or continuing `resume`.
FittedModel fit(const Measure &target, const TrainConfig &config,
                std::optional<TrainState> resume = std::nullopt,
                const StepCallback &on_step = {});

/// Training state resuming from a saved model.
TrainState resume_state(const FittedModel &model, const TrainConfig &config);

}  // namespace sinkgan

#endif  // SINKGAN_TRAINING_HPP
