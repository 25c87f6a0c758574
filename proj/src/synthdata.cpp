#include "sinkgan/synthdata.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sinkgan {

namespace {

using Rng = std::mt19937_64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Measure rows_to_measure(Matrix<double> pts) { return Measure(std::move(pts)); }

}  // namespace

const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names = {"spiral", "swissroll", "helix",
                                                 "mixture4", "mixture3-1d"};
  return names;
}

void check_experiment_name(const std::string &name) {
  for (const auto &n : experiment_names()) {
    if (n == name) {
      return;
    }
  }
  std::string valid;
  for (const auto &n : experiment_names()) {
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw std::invalid_argument("unknown experiment '" + name +
                              "' (valid: " + valid + ")");
}

Index experiment_dim(const std::string &name) {
  check_experiment_name(name);
  if (name == "spiral" || name == "mixture4") return 2;
  if (name == "mixture3-1d") return 1;
  return 3;
}

Vector<double> spiral_map(double x) {
  Vector<double> out(2);
  out << x * std::sin(kTwoPi * x), x * std::cos(kTwoPi * x);
  return out;
}

Vector<double> swissroll_map(double x, double y) {
  Vector<double> out(3);
  out << x * std::cos(kTwoPi * x), y, x * std::sin(kTwoPi * x);
  return out;
}

Vector<double> helix_map(double t, double turns, double height) {
  Vector<double> out(3);
  const double angle = kTwoPi * turns * t;
  out << std::cos(angle), std::sin(angle), height * t;
  return out;
}

LatentDraws spiral_latent(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  Rng rng(seed);
  const int comps = int(spec.spiral_means.size());
  std::uniform_int_distribution<int> pick(0, comps - 1);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(spec.spiral_variance);
  LatentDraws out{Matrix<double>(n, 1), std::vector<int>(std::size_t(n))};
  for (Index i = 0; i < n; ++i) {
    const int c = pick(rng);
    out.components[std::size_t(i)] = c;
    out.points(i, 0) = spec.spiral_means[std::size_t(c)] + sd * normal(rng);
  }
  return out;
}

LatentDraws swissroll_latent(Index n, std::uint64_t seed,
                             const ExperimentSpec &spec) {
  Rng rng(seed);
  const int comps = int(spec.swissroll_means.size());
  std::uniform_int_distribution<int> pick(0, comps - 1);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(spec.swissroll_variance);
  LatentDraws out{Matrix<double>(n, 2), std::vector<int>(std::size_t(n))};
  for (Index i = 0; i < n; ++i) {
    // Rejection against the unit square: density proportional to g 1_[0,1]^2.
    for (;;) {
      const int c = pick(rng);
      const double x = spec.swissroll_means[std::size_t(c)][0] + sd * normal(rng);
      const double y = spec.swissroll_means[std::size_t(c)][1] + sd * normal(rng);
      if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) {
        out.points(i, 0) = x;
        out.points(i, 1) = y;
        out.components[std::size_t(i)] = c;
        break;
      }
    }
  }
  return out;
}

LatentDraws mixture4_draws(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> normal;
  LatentDraws out{Matrix<double>(n, 2), std::vector<int>(std::size_t(n))};
  for (Index i = 0; i < n; ++i) {
    const int c = pick(rng);
    const double sx = (c & 1) ? 1.0 : -1.0;
    const double sy = (c & 2) ? 1.0 : -1.0;
    out.components[std::size_t(i)] = c;
    out.points(i, 0) = sx * spec.mixture4_offset + spec.mixture4_sigma * normal(rng);
    out.points(i, 1) = sy * spec.mixture4_offset + spec.mixture4_sigma * normal(rng);
  }
  return out;
}

Measure spiral_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  const LatentDraws z = spiral_latent(n, seed, spec);
  Matrix<double> pts(n, 2);
  for (Index i = 0; i < n; ++i) {
    pts.row(i) = spiral_map(z.points(i, 0)).transpose();
  }
  return rows_to_measure(std::move(pts));
}

Measure swissroll_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  const LatentDraws z = swissroll_latent(n, seed, spec);
  Matrix<double> pts(n, 3);
  for (Index i = 0; i < n; ++i) {
    pts.row(i) = swissroll_map(z.points(i, 0), z.points(i, 1)).transpose();
  }
  return rows_to_measure(std::move(pts));
}

Measure helix_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix<double> pts(n, 3);
  for (Index i = 0; i < n; ++i) {
    pts.row(i) = helix_map(unit(rng), spec.helix_turns, spec.helix_height).transpose();
  }
  return rows_to_measure(std::move(pts));
}

Measure mixture4_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  return rows_to_measure(mixture4_draws(n, seed, spec).points);
}

Measure mixture3_1d_sampler(Index n, std::uint64_t seed, const ExperimentSpec &spec) {
  return rows_to_measure(spiral_latent(n, seed, spec).points);
}

Sampler with_noise(Sampler base, double delta) {
  if (!(delta >= 0.0)) {
    throw std::invalid_argument("with_noise: delta must be >= 0");
  }
  if (delta == 0.0) {
    return base;
  }
  const Index dim = base.dim();
  return Sampler(dim, [base = std::move(base), delta](Index n, std::uint64_t seed) {
    const Measure clean = base(n, seed);
    // Separate stream from the base draw.
    Rng rng(seed ^ 0xa5a5a5a5deadbeefULL);
    std::normal_distribution<double> normal;
    Matrix<double> pts = clean.points();
    for (Index i = 0; i < pts.rows(); ++i) {
      for (Index j = 0; j < pts.cols(); ++j) {
        pts(i, j) += delta * normal(rng);
      }
    }
    return Measure(std::move(pts), clean.weights());
  });
}

Sampler make_sampler(const ExperimentSpec &spec) {
  const Index dim = experiment_dim(spec.name);
  using Fn = Measure (*)(Index, std::uint64_t, const ExperimentSpec &);
  Fn fn = nullptr;
  if (spec.name == "spiral") fn = spiral_sampler;
  if (spec.name == "swissroll") fn = swissroll_sampler;
  if (spec.name == "helix") fn = helix_sampler;
  if (spec.name == "mixture4") fn = mixture4_sampler;
  if (spec.name == "mixture3-1d") fn = mixture3_1d_sampler;
  Sampler base(dim, [fn, spec](Index n, std::uint64_t seed) {
    return fn(n, seed, spec);
  });
  return with_noise(std::move(base), spec.noise);
}

double erf_inv_pushforward(double x) {
  if (!(std::abs(x) < 1.0)) {
    throw std::domain_error("erf_inv_pushforward: |x| must be < 1");
  }
  if (x == 0.0) {
    return 0.0;
  }
  // Winitzki's closed form as a starting point (about 2e-3 relative error).
  constexpr double a = 0.147;
  const double ln = std::log1p(-x * x);
  const double t = 2.0 / (std::numbers::pi * a) + 0.5 * ln;
  double y = std::copysign(std::sqrt(std::sqrt(t * t - ln / a) - t), x);
  const double slope = 2.0 / std::sqrt(std::numbers::pi);
  for (int it = 0; it < 100; ++it) {
    const double r = std::erf(y) - x;
    if (std::abs(r) <= 1e-12 && it > 0) {
      break;
    }
    const double step = r / (slope * std::exp(-y * y));
    y -= step;
    if (std::abs(step) <= 1e-17 * std::abs(y)) {
      break;
    }
  }
  return std::sqrt(2.0) * y;
}

Matrix<double> spd_sqrt(const Matrix<double> &m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("spd_sqrt: matrix must be square");
  }
  if (!m.isApprox(m.transpose(), 1e-10) && (m - m.transpose()).norm() > 1e-12) {
    throw std::invalid_argument("spd_sqrt: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(m);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("spd_sqrt: matrix is not positive definite");
  }
  const Vector<double> root = es.eigenvalues().cwiseMax(1e-12).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

AffineMap gaussian_transport_map(const Vector<double> &mean_mu,
                                 const Matrix<double> &cov_mu,
                                 const Vector<double> &mean_rho,
                                 const Matrix<double> &cov_rho) {
  const Index d = mean_mu.size();
  if (mean_rho.size() != d || cov_mu.rows() != d || cov_rho.rows() != d) {
    throw std::invalid_argument("gaussian_transport_map: dimension mismatch");
  }
  const Matrix<double> root_mu = spd_sqrt(cov_mu);
  const Matrix<double> inv_root_mu = root_mu.inverse();
  Matrix<double> inner = root_mu * spd_sqrt(cov_rho) * spd_sqrt(cov_rho) * root_mu;
  inner = 0.5 * (inner + inner.transpose());
  Matrix<double> A = inv_root_mu * spd_sqrt(inner) * inv_root_mu;
  A = 0.5 * (A + A.transpose());
  Vector<double> b = mean_rho - A * mean_mu;
  return AffineMap{std::move(A), std::move(b)};
}

double affine_density(const Vector<double> &x, const Matrix<double> &A,
                      const Vector<double> &b,
                      const std::function<double(const Vector<double> &)> &f) {
  if (A.rows() != A.cols() || A.rows() != x.size() || b.size() != x.size()) {
    throw std::invalid_argument("affine_density: dimension mismatch");
  }
  Eigen::FullPivLU<Matrix<double>> lu(A);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("affine_density: A is singular");
  }
  return f(lu.solve(x - b)) / std::abs(lu.determinant());
}

Measure gaussian_sampler(const Vector<double> &mean, const Matrix<double> &cov,
                         Index n, std::uint64_t seed) {
  const Eigen::LLT<Matrix<double>> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian_sampler: covariance not SPD");
  }
  const Matrix<double> L = llt.matrixL();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix<double> pts(n, mean.size());
  Vector<double> z(mean.size());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < z.size(); ++j) {
      z(j) = normal(rng);
    }
    pts.row(i) = (mean + L * z).transpose();
  }
  return Measure(std::move(pts));
}

}  // namespace sinkgan
