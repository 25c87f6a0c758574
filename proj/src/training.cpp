#include "sinkgan/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sinkgan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-step stream, so a resumed run draws the same batches.
Rng step_rng(std::uint64_t seed, Index iteration) {
  return Rng(splitmix64(seed ^ splitmix64(std::uint64_t(iteration))));
}

Measure subsample(const Measure &target, Index count, Rng &rng) {
  const Index n = target.size();
  if (count <= 0 || count >= n) {
    return target;
  }
  Matrix<double> pts(count, target.dim());
  const bool uniform =
      (target.weights().array() - target.weights()(0)).abs().maxCoeff() < 1e-15;
  if (uniform) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index(0));
    for (Index j = 0; j < count; ++j) {
      std::uniform_int_distribution<Index> pick(j, n - 1);
      std::swap(idx[std::size_t(j)], idx[std::size_t(pick(rng))]);
      pts.row(j) = target.points().row(idx[std::size_t(j)]);
    }
  } else {
    std::discrete_distribution<Index> pick(target.weights().data(),
                                           target.weights().data() + n);
    for (Index j = 0; j < count; ++j) {
      pts.row(j) = target.points().row(pick(rng));
    }
  }
  return Measure(std::move(pts));
}

bool is_latent_phase(const TrainConfig &config, Index iteration) {
  if (config.fixed_latent || config.schedule == ScheduleMode::simultaneous) {
    return false;
  }
  const Index cycle = config.gen_iters + config.latent_iters;
  return iteration % cycle >= config.gen_iters;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string &msg) {
    throw std::invalid_argument("train config: " + msg);
  };
  if (latent_dim < 1) fail("latent_dim must be >= 1");
  if (activations.size() != hidden.size()) {
    fail(std::to_string(hidden.size()) + " hidden layers but " +
         std::to_string(activations.size()) + " activations");
  }
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (particles < 1) fail("particles must be >= 1");
  if (!(delta >= 0.0)) fail("delta must be >= 0");
  if (!(epsilon0 > 0.0)) fail("epsilon0 must be > 0");
  if (!(epsilon_floor > 0.0) || epsilon_floor > epsilon0) {
    fail("epsilon_floor must be in (0, epsilon0]");
  }
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
    fail("epsilon_decay must be in (0, 1]");
  }
  if (epsilon_period < 1) fail("epsilon_period must be >= 1");
  if (!(lr_generator >= 0.0) || !(lr_particles >= 0.0)) {
    fail("learning rates must be >= 0");
  }
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (!(sinkhorn_tol > 0.0)) fail("sinkhorn_tol must be > 0");
  if (sinkhorn_max_iter < 1) fail("sinkhorn_max_iter must be >= 1");
  if (target_batch && *target_batch < 0) fail("target_batch must be >= 0");
  if (schedule == ScheduleMode::block && (gen_iters < 1 || latent_iters < 0)) {
    fail("block schedule needs gen_iters >= 1 and latent_iters >= 0");
  }
}

std::vector<Index> TrainConfig::layer_dims(Index target_dim) const {
  std::vector<Index> dims;
  dims.push_back(latent_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(target_dim);
  return dims;
}

Index TrainConfig::effective_target_batch(Index n) const {
  const Index t = target_batch.value_or(batch_size);
  return (t == 0 || t >= n) ? n : t;
}

double epsilon_schedule(Index step, const TrainConfig &config) {
  if (step < 0) {
    throw std::invalid_argument("epsilon_schedule: negative step");
  }
  const double decays = double(step / config.epsilon_period);
  const double eps = config.epsilon0 * std::pow(config.epsilon_decay, decays);
  return std::max(eps, config.epsilon_floor);
}

void adam_update(Vector<double> &params, const Vector<double> &grad,
                 AdamMoments &moments, double lr, double beta1, double beta2,
                 double eps) {
  if (grad.size() != params.size()) {
    throw std::invalid_argument("adam_update: gradient size mismatch");
  }
  if (moments.first.size() != params.size()) {
    moments.first = Vector<double>::Zero(params.size());
    moments.second = Vector<double>::Zero(params.size());
    moments.step = 0;
  }
  ++moments.step;
  moments.first = beta1 * moments.first + (1.0 - beta1) * grad;
  moments.second = beta2 * moments.second + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, double(moments.step));
  const double c2 = 1.0 - std::pow(beta2, double(moments.step));
  params.array() -= lr * (moments.first.array() / c1) /
                    ((moments.second.array() / c2).sqrt() + eps);
}

TrainState init_state(const TrainConfig &config, Index target_dim) {
  config.validate();
  Generator net = mlp_new(config.layer_dims(target_dim), config.activations,
                          splitmix64(config.seed ^ 0x6e6574ULL));
  ParticleLatent latent = gaussian_particles(
      config.particles, config.latent_dim, config.init_scale, config.delta,
      splitmix64(config.seed ^ 0x6c6174ULL), config.init_mean);
  TrainState state{std::move(net), std::move(latent)};
  state.moments.first = Vector<double>::Zero(state.net.num_params());
  state.moments.second = Vector<double>::Zero(state.net.num_params());
  state.epsilon = epsilon_schedule(0, config);
  return state;
}

ObjectiveGradients objective_gradients(
    const Generator &net, const ParticleLatent &latent, const Measure &target,
    const LatentBatch &batch, const GradientSettings &settings,
    const std::optional<SinkhornPotentials<double>> &cross_warm,
    const std::optional<SinkhornPotentials<double>> &self_warm,
    const std::optional<double> &target_self_ot) {
  if (net.input_dim() != latent.dim() || batch.points.cols() != latent.dim()) {
    throw std::invalid_argument("objective_gradients: latent dimension mismatch");
  }
  if (net.output_dim() != target.dim()) {
    throw std::invalid_argument("objective_gradients: generator outputs dim " +
                                std::to_string(net.output_dim()) +
                                ", target has dim " + std::to_string(target.dim()));
  }
  const double eps = settings.epsilon;
  const Index ell = batch.size();
  const ForwardTape<double> tape = net.forward_batch(batch.points.transpose());
  const Measure model(tape.outputs.back().transpose());

  std::optional<WarmStart<double>> cross_init;
  if (cross_warm && cross_warm->mu.dim() == model.dim()) {
    cross_init = WarmStart<double>{
        extend_potential(*cross_warm, model.points(), Side::first),
        extend_potential(*cross_warm, target.points(), Side::second)};
  }
  std::optional<Vector<double>> self_init;
  if (self_warm && self_warm->mu.dim() == model.dim()) {
    self_init = extend_potential(*self_warm, model.points(), Side::first);
  }

  ObjectiveGradients out;
  out.cross = sinkhorn_knopp(model, target, eps, settings.sinkhorn, cross_init);
  Matrix<double> g = grad_extended_potential(*out.cross, model.points(), Side::first);
  out.converged = out.cross->converged;
  out.self = autocorrelation_potential(model, eps, settings.sinkhorn, self_init);
  out.converged = out.converged && out.self->converged;
  if (!settings.biased) {
    g -= grad_extended_potential(*out.self, model.points(), Side::first);
  }
  if (target_self_ot) {
    out.divergence_estimate =
        ot_eps(*out.cross) - 0.5 * ot_eps(*out.self) - 0.5 * *target_self_ot;
  } else {
    out.divergence_estimate = kNaN;
  }

  // Each atom carries mass 1/l (uniform batch measure).
  const Matrix<double> cot = g.transpose() / double(ell);
  const BatchCotangents<double> back = net.backward(tape, cot);
  out.theta = back.params;
  out.particles = Matrix<double>::Zero(latent.size(), latent.dim());
  for (Index j = 0; j < ell; ++j) {
    out.particles.row(batch.indices[std::size_t(j)]) +=
        back.inputs.col(j).transpose();
  }
  out.cotangents = std::move(g);
  return out;
}

Vector<double> objective_gradient_theta(const Generator &net,
                                        const ParticleLatent &latent,
                                        const Measure &target,
                                        const LatentBatch &batch,
                                        const GradientSettings &settings) {
  return objective_gradients(net, latent, target, batch, settings).theta;
}

Matrix<double> objective_gradient_particles(const Generator &net,
                                            const ParticleLatent &latent,
                                            const Measure &target,
                                            const LatentBatch &batch,
                                            const GradientSettings &settings) {
  return objective_gradients(net, latent, target, batch, settings).particles;
}

double batch_objective(const Generator &net, const LatentBatch &batch,
                       const Measure &target, const GradientSettings &settings) {
  const Matrix<double> x = net.apply_batch(batch.points.transpose());
  const Measure model(x.transpose());
  const auto report =
      sinkhorn_divergence_report(model, target, settings.epsilon, settings.sinkhorn);
  return report.raw;
}

TrainState train_step(TrainState state, const Measure &target,
                      const TrainConfig &config) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = step_rng(config.seed, state.iteration);
  const bool latent_phase = is_latent_phase(config, state.iteration);
  const bool update_generator = !latent_phase;
  const bool update_particles =
      !config.fixed_latent &&
      (config.schedule == ScheduleMode::simultaneous || latent_phase);

  const LatentBatch batch = sample_batch(state.latent, config.batch_size, rng);
  const Measure target_batch =
      subsample(target, config.effective_target_batch(target.size()), rng);

  GradientSettings settings;
  settings.epsilon = state.epsilon;
  settings.sinkhorn.tol = config.sinkhorn_tol;
  settings.sinkhorn.max_iter = config.sinkhorn_max_iter;
  settings.sinkhorn.relaxation = config.sinkhorn_relaxation;
  settings.biased = config.biased_gradient;

  std::optional<Vector<double>> target_self_init;
  if (state.self_warm && state.self_warm->mu.dim() == target.dim()) {
    target_self_init = extend_potential(*state.self_warm, target_batch.points(),
                                        Side::first);
  }
  const double target_self_ot = ot_eps(autocorrelation_potential(
      target_batch, state.epsilon, settings.sinkhorn, target_self_init));

  MetricRow row;
  row.iter = state.iteration;
  row.epsilon = state.epsilon;
  bool accepted = true;
  try {
    ObjectiveGradients grads =
        objective_gradients(state.net, state.latent, target_batch, batch,
                            settings, state.cross_warm, state.self_warm,
                            target_self_ot);
    row.sinkhorn_estimate = grads.divergence_estimate;
    row.grad_norm_theta = grads.theta.norm();
    row.grad_norm_particles = grads.particles.norm();
    if (!grads.theta.allFinite() || !grads.particles.allFinite() ||
        !grads.cotangents.allFinite()) {
      throw std::domain_error("non-finite gradient");
    }

    Generator next_net = state.net;
    AdamMoments next_moments = state.moments;
    // The listing sums over the batch; with Adam the scale is immaterial.
    const double batch_scale = double(config.batch_size);
    if (update_generator) {
      if (config.optimizer == Optimizer::adam) {
        adam_update(next_net.params(), grads.theta, next_moments,
                    config.lr_generator, config.adam_beta1, config.adam_beta2,
                    config.adam_eps);
      } else {
        next_net.params() -= config.lr_generator * batch_scale * grads.theta;
      }
      if (!next_net.params().allFinite()) {
        throw std::domain_error("non-finite generator parameters");
      }
    }
    ParticleLatent next_latent =
        update_particles
            ? apply_flow_updates(state.latent, batch_scale * grads.particles,
                                 config.lr_particles)
            : state.latent;

    state.net = std::move(next_net);
    state.moments = std::move(next_moments);
    state.latent = std::move(next_latent);
    state.cross_warm = std::move(grads.cross);
    state.self_warm = std::move(grads.self);
  } catch (const std::domain_error &) {
    accepted = false;
    ++state.rejected_steps;
    state.cross_warm.reset();
    state.self_warm.reset();
  }
  if (!accepted && !std::isfinite(row.sinkhorn_estimate)) {
    row.sinkhorn_estimate = kNaN;
  }

  if (update_generator) {
    ++state.generator_steps;
  }
  ++state.iteration;
  const Index schedule_step =
      config.schedule == ScheduleMode::block && !config.fixed_latent
          ? state.generator_steps
          : state.iteration;
  state.epsilon = epsilon_schedule(schedule_step, config);
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  state.log.push_back(row);
  return state;
}

TrainState resume_state(const FittedModel &model, const TrainConfig &config) {
  config.validate();
  TrainState state{model.net, model.latent};
  state.moments = model.moments;
  if (state.moments.first.size() != state.net.num_params()) {
    state.moments.first = Vector<double>::Zero(state.net.num_params());
    state.moments.second = Vector<double>::Zero(state.net.num_params());
    state.moments.step = 0;
  }
  state.iteration = model.iteration;
  state.generator_steps = model.generator_steps;
  state.log = model.log;
  const Index schedule_step =
      config.schedule == ScheduleMode::block && !config.fixed_latent
          ? state.generator_steps
          : state.iteration;
  state.epsilon = epsilon_schedule(schedule_step, config);
  return state;
}

FittedModel fit(const Measure &target, const TrainConfig &config,
                std::optional<TrainState> resume, const StepCallback &on_step) {
  config.validate();
  TrainState state = resume ? std::move(*resume) : init_state(config, target.dim());
  if (state.net.output_dim() != target.dim()) {
    throw std::invalid_argument("fit: generator outputs dim " +
                                std::to_string(state.net.output_dim()) +
                                ", target has dim " + std::to_string(target.dim()));
  }
  for (Index i = 0; i < config.max_iters; ++i) {
    state = train_step(std::move(state), target, config);
    if (on_step) {
      on_step(state);
    }
  }
  return FittedModel{std::move(state.net),   std::move(state.latent),
                     std::move(state.log),   state.iteration,
                     state.generator_steps, std::move(state.moments)};
}

}  // namespace sinkgan
