#include "sinkgan/latent.hpp"

#include "sinkgan/sinkhorn.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sinkgan;

namespace {

Generator identity_net(Index k) {
  Generator net({k, k}, {});
  net.weight(0).setIdentity();
  return net;
}

}  // namespace

TEST(ParticleLatent, Validates) {
  EXPECT_THROW(ParticleLatent(Matrix<double>(0, 1), 0.1), std::invalid_argument);
  EXPECT_THROW(ParticleLatent(Matrix<double>::Zero(2, 1), -0.1), std::invalid_argument);
  Matrix<double> bad = Matrix<double>::Zero(2, 1);
  bad(1, 0) = std::nan("");
  EXPECT_THROW(ParticleLatent(bad, 0.1), std::invalid_argument);
}

TEST(GaussianParticles, ShapeAndDeterminism) {
  const auto a = gaussian_particles(50, 3, 2.0, 0.1, 7);
  const auto b = gaussian_particles(50, 3, 2.0, 0.1, 7);
  EXPECT_EQ(a.size(), 50);
  EXPECT_EQ(a.dim(), 3);
  EXPECT_EQ(a.particles, b.particles);
  const auto shifted = gaussian_particles(50, 3, 2.0, 0.1, 7, 0.5);
  EXPECT_LT((shifted.particles.array() - a.particles.array() - 0.5).abs().maxCoeff(), 1e-12);
}

TEST(SampleBatch, ZeroDeltaCopiesParticles) {
  const auto lat = gaussian_particles(10, 2, 1.0, 0.0, 3);
  const auto batch = sample_batch(lat, 200, std::uint64_t(4));
  EXPECT_TRUE(batch.perturbations.isZero(0.0));
  for (Index j = 0; j < batch.size(); ++j) {
    EXPECT_EQ(Vector<double>(batch.points.row(j).transpose()),
              Vector<double>(lat.particles.row(batch.indices[std::size_t(j)]).transpose()));
  }
}

TEST(SampleBatch, SingleParticle) {
  const auto lat = gaussian_particles(1, 2, 1.0, 0.3, 3);
  const auto batch = sample_batch(lat, 100, std::uint64_t(5));
  for (Index i : batch.indices) EXPECT_EQ(i, 0);
}

TEST(SampleBatch, IndexFrequenciesBinomial) {
  const auto lat = gaussian_particles(4, 1, 1.0, 0.1, 3);
  const Index ell = 100000;
  const auto batch = sample_batch(lat, ell, std::uint64_t(6));
  std::vector<Index> counts(4, 0);
  for (Index i : batch.indices) {
    ASSERT_GE(i, 0);
    ASSERT_LT(i, 4);
    ++counts[std::size_t(i)];
  }
  const double mean = double(ell) / 4.0;
  const double sd = std::sqrt(double(ell) * 0.25 * 0.75);
  for (Index c : counts) EXPECT_LT(std::abs(double(c) - mean), 3.0 * sd);
}

TEST(SampleBatch, MeanConvergesToParticleMean) {
  const auto lat = gaussian_particles(7, 2, 1.0, 0.5, 8);
  const Index ell = 100000;
  const auto batch = sample_batch(lat, ell, std::uint64_t(9));
  const Eigen::RowVectorXd particle_mean = lat.particles.colwise().mean();
  const Eigen::RowVectorXd batch_mean = batch.points.colwise().mean();
  // Per-coordinate variance: spread of the particles plus delta^2.
  for (Index c = 0; c < 2; ++c) {
    const double spread =
        (lat.particles.col(c).array() - particle_mean(c)).square().mean() + 0.25;
    const double se = std::sqrt(spread / double(ell));
    EXPECT_LT(std::abs(batch_mean(c) - particle_mean(c)), 4.0 * se);
  }
}

TEST(SampleBatch, DeterministicAndRejectsEmpty) {
  const auto lat = gaussian_particles(5, 2, 1.0, 0.2, 1);
  const auto a = sample_batch(lat, 30, std::uint64_t(11));
  const auto b = sample_batch(lat, 30, std::uint64_t(11));
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.points, b.points);
  EXPECT_THROW(sample_batch(lat, 0, std::uint64_t(1)), std::invalid_argument);
}

TEST(FlowUpdates, ZeroGradsAndZeroStep) {
  const auto lat = gaussian_particles(6, 2, 1.0, 0.1, 2);
  const auto same = apply_flow_updates(lat, Matrix<double>::Zero(6, 2), 0.5);
  EXPECT_EQ(same.particles, lat.particles);
  const auto frozen = apply_flow_updates(lat, Matrix<double>::Ones(6, 2), 0.0);
  EXPECT_EQ(frozen.particles, lat.particles);
}

TEST(FlowUpdates, OnlyTouchedParticlesMove) {
  const auto lat = gaussian_particles(6, 2, 1.0, 0.1, 2);
  Matrix<double> grads = Matrix<double>::Zero(6, 2);
  grads.row(3) << 1.0, -2.0;
  const auto next = apply_flow_updates(lat, grads, 0.1);
  for (Index i = 0; i < 6; ++i) {
    if (i == 3) {
      EXPECT_NEAR(next.particles(3, 0), lat.particles(3, 0) - 0.1, 1e-15);
      EXPECT_NEAR(next.particles(3, 1), lat.particles(3, 1) + 0.2, 1e-15);
    } else {
      EXPECT_EQ(Vector<double>(next.particles.row(i).transpose()),
                Vector<double>(lat.particles.row(i).transpose()));
    }
  }
}

TEST(FlowUpdates, RejectsNonFinite) {
  const auto lat = gaussian_particles(2, 1, 1.0, 0.1, 2);
  Matrix<double> grads = Matrix<double>::Zero(2, 1);
  grads(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(apply_flow_updates(lat, grads, 0.1), std::domain_error);
  EXPECT_THROW(apply_flow_updates(lat, Matrix<double>::Zero(3, 1), 0.1), std::invalid_argument);
}

TEST(FlowUpdates, SingletonContraction) {
  // Identity generator, one particle z, target delta_y, batch of one: the
  // cross potential gradient at x = z is 2 (z - y), so each step multiplies
  // z - y by (1 - 2 alpha).
  const double alpha = 0.1;
  Matrix<double> zp(1, 2);
  zp << 1.0, -0.5;
  ParticleLatent lat(zp, 0.0);
  const Measure target = make_measure<double>({{0.25, 0.75}});
  const Vector<double> y = target.points().row(0).transpose();
  double prev = (Vector<double>(lat.particles.row(0).transpose()) - y).norm();
  for (int step = 0; step < 10; ++step) {
    const Measure x = make_measure(Matrix<double>(lat.particles));
    const auto pot = sinkhorn_knopp(x, target, 0.1);
    const Matrix<double> grad = grad_extended_potential(pot, lat.particles, Side::first);
    const Vector<double> z = lat.particles.row(0).transpose();
    EXPECT_LT((grad.row(0).transpose() - 2.0 * (z - y)).norm(), 1e-12);
    lat = apply_flow_updates(lat, grad, alpha);
    const double dist = (Vector<double>(lat.particles.row(0).transpose()) - y).norm();
    EXPECT_NEAR(dist / prev, 1.0 - 2.0 * alpha, 1e-12);
    prev = dist;
  }
}

TEST(SampleModel, DiracLatentIdentityNet) {
  Matrix<double> zp(1, 2);
  zp << 0.3, -0.9;
  const ParticleLatent lat(zp, 0.0);
  const Measure m = sample_model(identity_net(2), lat, 25, 3);
  EXPECT_EQ(m.size(), 25);
  for (Index i = 0; i < 25; ++i) {
    EXPECT_EQ(m.points()(i, 0), 0.3);
    EXPECT_EQ(m.points()(i, 1), -0.9);
  }
}

TEST(SampleModel, DeterministicAndChecksDim) {
  const auto lat = gaussian_particles(10, 2, 1.0, 0.2, 3);
  const auto net = mlp_new({2, 4, 3}, {Activation::tanh}, 5);
  EXPECT_EQ(sample_model(net, lat, 40, 8).points(), sample_model(net, lat, 40, 8).points());
  EXPECT_NE(sample_model(net, lat, 40, 8).points(), sample_model(net, lat, 40, 9).points());
  EXPECT_THROW(sample_model(identity_net(3), lat, 5, 1), std::invalid_argument);
}
