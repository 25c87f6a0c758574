#ifndef SINKGAN_SYNTHDATA_HPP
#define SINKGAN_SYNTHDATA_HPP

#include "sinkgan/measure.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sinkgan {

/// Target laws used by the experiments, each an exact pushforward of a latent
/// draw. Constants default to the published setups; the helix and the
/// four-Gaussian mixture use fixed artifact choices.
struct ExperimentSpec {
  std::string name = "spiral";
  Index train_size = 1000;
  Index test_size = 1000;
  std::uint64_t seed = 0;

  // spiral: 1-D mixture pushed by x -> (x sin 2 pi x, x cos 2 pi x)
  std::vector<double> spiral_means = {0.1, 0.7, 0.9};
  double spiral_variance = 0.1;

  // swissroll: 2-D mixture truncated to [0,1]^2 pushed by
  // (x, y) -> (x cos 2 pi x, y, x sin 2 pi x)
  std::vector<std::array<double, 2>> swissroll_means = {
      {0.4, 0.4}, {0.2, 0.8}, {0.8, 0.5}};
  double swissroll_variance = 0.15;

  // helix: t ~ U[0,1] -> (cos(2 pi turns t), sin(2 pi turns t), height t)
  double helix_turns = 2.0;
  double helix_height = 1.0;

  // mixture4: four isotropic Gaussians at (+-offset, +-offset)
  double mixture4_offset = 1.0;
  double mixture4_sigma = 0.2;

  // Isotropic Gaussian noise of this std added to every target draw.
  double noise = 0.0;
};

const std::vector<std::string> &experiment_names();
Index experiment_dim(const std::string &name);
/// Throws std::invalid_argument naming the valid experiments.
void check_experiment_name(const std::string &name);

Vector<double> spiral_map(double x);
Vector<double> swissroll_map(double x, double y);
Vector<double> helix_map(double t, double turns = 2.0, double height = 1.0);

/// Latent draws of the spiral mixture (n x 1) and the truncated swiss-roll
/// mixture (n x 2), plus the index of the component each came from.
struct LatentDraws {
  Matrix<double> points;
  std::vector<int> components;
};
LatentDraws spiral_latent(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});
LatentDraws swissroll_latent(Index n, std::uint64_t seed,
                             const ExperimentSpec &spec = {});
LatentDraws mixture4_draws(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});

Measure spiral_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});
Measure swissroll_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});
Measure helix_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});
Measure mixture4_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});
Measure mixture3_1d_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec = {});

/// Sampler for spec.name, with spec.noise added when positive.
Sampler make_sampler(const ExperimentSpec &spec);

/// Adds N(0, delta^2 I) to every draw of `base`.
Sampler with_noise(Sampler base, double delta);

/// sqrt(2) erf^{-1}(x): pushes U(-1, 1) to N(0, 1). Newton iterations on
/// erf(y) = x until the residual is at most 1e-12.
double erf_inv_pushforward(double x);

struct AffineMap {
  Matrix<double> A;
  Vector<double> b;

  Index input_dim() const { return A.cols(); }
  Vector<double> operator()(const Vector<double> &x) const { return A * x + b; }
};

/// Monge map between N(m_mu, S_mu) and N(m_rho, S_rho):
/// A = S_mu^{-1/2} (S_mu^{1/2} S_rho S_mu^{1/2})^{1/2} S_mu^{-1/2},
/// b = m_rho - A m_mu.
AffineMap gaussian_transport_map(const Vector<double> &mean_mu,
                                 const Matrix<double> &cov_mu,
                                 const Vector<double> &mean_rho,
                                 const Matrix<double> &cov_rho);

/// Symmetric square root by eigendecomposition (eigenvalues floored at 1e-12).
/// Throws on non-symmetric or non positive definite input.
Matrix<double> spd_sqrt(const Matrix<double> &m);

/// Density of the pushforward of f by x -> A x + b:
/// g(x) = f(A^{-1}(x - b)) |det A^{-1}|.
double affine_density(const Vector<double> &x, const Matrix<double> &A,
                      const Vector<double> &b,
                      const std::function<double(const Vector<double> &)> &f);

/// n draws from N(mean, cov).
Measure gaussian_sampler(const Vector<double> &mean, const Matrix<double> &cov,
                         Index n, std::uint64_t seed);

}  // namespace sinkgan

#endif  // SINKGAN_SYNTHDATA_HPP
