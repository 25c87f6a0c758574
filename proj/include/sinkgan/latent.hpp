#ifndef SINKGAN_LATENT_HPP
#define SINKGAN_LATENT_HPP

#include "sinkgan/generator.hpp"
#include "sinkgan/measure.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace sinkgan {

using Rng = std::mt19937_64;

/// Latent law eta = Phi_delta * (1/m) sum_i delta_{z_i}: m particles in R^k
/// smoothed by an isotropic Gaussian of standard deviation delta.
struct ParticleLatent {
  Matrix<double> particles;  // m x k
  double delta = 0.0;

  ParticleLatent() = default;
  ParticleLatent(Matrix<double> particles, double delta);

  Index size() const { return particles.rows(); }
  Index dim() const { return particles.cols(); }
};

/// Particles drawn i.i.d. from N(mean, scale^2 I_k).
ParticleLatent gaussian_particles(Index m, Index k, double scale, double delta,
                                  std::uint64_t seed, double mean = 0.0);

/// l draws z_{i_j} + w_j with i_j uniform over particles and w_j ~ Phi_delta.
/// Indices are zero-based.
struct LatentBatch {
  std::vector<Index> indices;
  Matrix<double> perturbations;  // l x k
  Matrix<double> points;         // l x k

  Index size() const { return Index(indices.size()); }
};

LatentBatch sample_batch(const ParticleLatent &latent, Index count, Rng &rng);
LatentBatch sample_batch(const ParticleLatent &latent, Index count,
                         std::uint64_t seed);

/// z_i <- z_i - step * grads_i. Rows of `grads` that are exactly zero leave
/// their particle bitwise unchanged. Throws std::domain_error on a non-finite
/// gradient; the input latent is untouched.
ParticleLatent apply_flow_updates(const ParticleLatent &latent,
                                  const Matrix<double> &grads, double step);

/// n draws x = T(z_i + w) with uniform weights.
Measure sample_model(const Generator &net, const ParticleLatent &latent,
                     Index n, std::uint64_t seed);

}  // namespace sinkgan

#endif  // SINKGAN_LATENT_HPP
