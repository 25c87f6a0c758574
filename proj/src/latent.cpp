#include "sinkgan/latent.hpp"

#include <stdexcept>
#include <string>

namespace sinkgan {

ParticleLatent::ParticleLatent(Matrix<double> p, double d)
    : particles(std::move(p)), delta(d) {
  if (particles.rows() < 1 || particles.cols() < 1) {
    throw std::invalid_argument("latent: need at least one particle of dim >= 1");
  }
  if (!(delta >= 0.0)) {
    throw std::invalid_argument("latent: delta must be >= 0");
  }
  if (!particles.allFinite()) {
    throw std::invalid_argument("latent: particles must be finite");
  }
}

ParticleLatent gaussian_particles(Index m, Index k, double scale, double delta,
                                  std::uint64_t seed, double mean) {
  if (m < 1 || k < 1) {
    throw std::invalid_argument("latent: m and k must be >= 1");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix<double> p(m, k);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < k; ++j) {
      p(i, j) = mean + scale * normal(rng);
    }
  }
  return ParticleLatent(std::move(p), delta);
}

LatentBatch sample_batch(const ParticleLatent &latent, Index count, Rng &rng) {
  if (count < 1) {
    throw std::invalid_argument("sample_batch: batch size must be >= 1");
  }
  const Index k = latent.dim();
  std::uniform_int_distribution<Index> pick(0, latent.size() - 1);
  std::normal_distribution<double> normal;
  LatentBatch batch;
  batch.indices.resize(std::size_t(count));
  batch.perturbations = Matrix<double>::Zero(count, k);
  batch.points.resize(count, k);
  for (Index j = 0; j < count; ++j) {
    const Index i = pick(rng);
    batch.indices[std::size_t(j)] = i;
    if (latent.delta > 0.0) {
      for (Index c = 0; c < k; ++c) {
        batch.perturbations(j, c) = latent.delta * normal(rng);
      }
    }
    batch.points.row(j) = latent.particles.row(i) + batch.perturbations.row(j);
  }
  return batch;
}

LatentBatch sample_batch(const ParticleLatent &latent, Index count,
                         std::uint64_t seed) {
  Rng rng(seed);
  return sample_batch(latent, count, rng);
}

ParticleLatent apply_flow_updates(const ParticleLatent &latent,
                                  const Matrix<double> &grads, double step) {
  if (grads.rows() != latent.size() || grads.cols() != latent.dim()) {
    throw std::invalid_argument("apply_flow_updates: gradient shape mismatch");
  }
  if (!grads.allFinite()) {
    throw std::domain_error("apply_flow_updates: non-finite particle gradient");
  }
  ParticleLatent next = latent;
  if (step == 0.0) {
    return next;
  }
  for (Index i = 0; i < grads.rows(); ++i) {
    if (grads.row(i).isZero(0.0)) {
      continue;
    }
    next.particles.row(i) -= step * grads.row(i);
  }
  if (!next.particles.allFinite()) {
    throw std::domain_error("apply_flow_updates: particles became non-finite");
  }
  return next;
}

Measure sample_model(const Generator &net, const ParticleLatent &latent,
                     Index n, std::uint64_t seed) {
  if (net.input_dim() != latent.dim()) {
    throw std::invalid_argument("sample_model: generator expects dim " +
                                std::to_string(net.input_dim()) +
                                ", latent has " + std::to_string(latent.dim()));
  }
  const LatentBatch batch = sample_batch(latent, n, seed);
  const Matrix<double> x = net.apply_batch(batch.points.transpose());
  return Measure(x.transpose());
}

}  // namespace sinkgan
