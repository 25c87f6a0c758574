#include "sinkgan/generator.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sinkgan;

namespace {

Generator identity_net() {
  Generator net({1, 1}, {});
  net.weight(0)(0, 0) = 1.0;
  return net;
}

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(Index(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Random biases so every unit is exercised away from zero.
Generator tanh_net(std::uint64_t seed) {
  Generator net = mlp_new({3, 5, 4, 2}, {Activation::tanh, Activation::tanh}, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Index l = 0; l < net.num_layers(); ++l) {
    for (Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = u(rng);
  }
  return net;
}

}  // namespace

TEST(Generator, IdentityNetwork) {
  const Generator net = identity_net();
  EXPECT_DOUBLE_EQ(net(vec({0.7}))(0), 0.7);
}

TEST(Generator, AffineArithmetic) {
  Generator net({1, 1}, {});
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)(0) = 1.0;
  EXPECT_DOUBLE_EQ(net(vec({3.0}))(0), 7.0);
}

TEST(Generator, PaperArchitectureShape) {
  const Generator net = mlp_new({2, 256, 1024, 256, 256, 3},
                                {Activation::relu, Activation::relu, Activation::tanh,
                                 Activation::identity},
                                1);
  EXPECT_EQ(net.num_layers(), 5);
  EXPECT_EQ(net.num_params(), 2 * 256 + 256 + 256 * 1024 + 1024 + 1024 * 256 + 256 +
                                  256 * 256 + 256 + 256 * 3 + 3);
  EXPECT_EQ(net.input_dim(), 2);
  EXPECT_EQ(net.output_dim(), 3);
}

TEST(Generator, InitializationIsDeterministicAndBounded) {
  const auto a = mlp_new({2, 8, 3}, {Activation::relu}, 42);
  const auto b = mlp_new({2, 8, 3}, {Activation::relu}, 42);
  const auto c = mlp_new({2, 8, 3}, {Activation::relu}, 43);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_NE(a.params(), c.params());
  const double bound = std::sqrt(6.0 / 10.0);
  EXPECT_LE(a.weight(0).cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE(a.bias(0).isZero(0.0));
  EXPECT_TRUE(a.bias(1).isZero(0.0));
}

TEST(Generator, RejectsInvalidShapes) {
  EXPECT_THROW(Generator({2}, {}), std::invalid_argument);
  EXPECT_THROW(Generator({2, 0, 1}, {Activation::relu}), std::invalid_argument);
  EXPECT_THROW(Generator({2, 3, 1}, {}), std::invalid_argument);
  Generator net({2, 3, 1}, {Activation::relu});
  EXPECT_THROW(net(vec({1.0})), std::invalid_argument);
  EXPECT_THROW(net.set_params(Vector<double>::Zero(3)), std::invalid_argument);
}

TEST(Generator, FiniteOnLargeInputs) {
  const auto net = mlp_new({2, 16, 16, 3}, {Activation::relu, Activation::tanh}, 3);
  for (double r : {1.0, 10.0, 1e3}) {
    EXPECT_TRUE(net(vec({r, -r})).allFinite());
  }
}

TEST(Generator, BatchMatchesSingle) {
  const Generator net = tanh_net(9);
  std::mt19937_64 rng(2);
  const Matrix<double> z = oracle::random_points(3, 6, rng);
  const Matrix<double> batch = net.apply_batch(z);
  for (Index j = 0; j < 6; ++j) {
    EXPECT_LT((batch.col(j) - net(z.col(j))).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Generator, ActivationNames) {
  EXPECT_EQ(activation_from_string("relu"), Activation::relu);
  EXPECT_EQ(activation_from_string("sigmoid"), Activation::tanh);
  EXPECT_EQ(to_string(Activation::identity), "identity");
  EXPECT_THROW(activation_from_string("gelu"), std::invalid_argument);
}

TEST(VjpParams, SingleAffineLayerByHand) {
  Generator net({3, 2}, {});
  std::mt19937_64 rng(4);
  net.set_params(oracle::random_points(net.num_params(), 1, rng).col(0));
  const Vector<double> z = vec({0.3, -1.2, 2.0});
  const Vector<double> g = vec({1.0, 0.0});
  const Vector<double> grad = net.vjp_params(z, g);
  // Layout: W row-major (2 x 3), then b (2).
  Vector<double> expected = Vector<double>::Zero(8);
  expected.head(3) = z;
  expected(6) = 1.0;
  EXPECT_EQ(grad, expected);
}

TEST(VjpParams, ZeroCotangent) {
  const Generator net = tanh_net(5);
  const Vector<double> grad = net.vjp_params(vec({0.1, 0.2, 0.3}), Vector<double>::Zero(2));
  EXPECT_TRUE(grad.isZero(0.0));
}

TEST(VjpParams, FiniteDifferences) {
  const Generator net = tanh_net(17);
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector<double> z = oracle::random_points(3, 1, rng).col(0);
    const Vector<double> g = oracle::random_points(2, 1, rng).col(0);
    const Vector<double> analytic = net.vjp_params(z, g);
    const Vector<double> fd = oracle::central_difference(
        [&](const Vector<double> &p) {
          Generator probe = net;
          probe.set_params(p);
          return g.dot(probe(z));
        },
        net.params(), 1e-6);
    EXPECT_LT(oracle::relative_error(analytic, fd), 1e-5);
    double worst = 0.0;
    for (Index i = 0; i < fd.size(); ++i) {
      const double scale = std::max(std::abs(fd(i)), 1e-3);
      worst = std::max(worst, std::abs(analytic(i) - fd(i)) / scale);
    }
    EXPECT_LT(worst, 1e-5);
  }
}

TEST(VjpParams, ReluFiniteDifferencesAwayFromKinks) {
  const auto net = mlp_new({2, 6, 6, 2}, {Activation::relu, Activation::relu}, 23);
  std::mt19937_64 rng(24);
  const Vector<double> z = oracle::random_points(2, 1, rng).col(0).array() + 0.01;
  const Vector<double> g = vec({0.4, -1.1});
  const Vector<double> fd = oracle::central_difference(
      [&](const Vector<double> &p) {
        Generator probe = net;
        probe.set_params(p);
        return g.dot(probe(z));
      },
      net.params(), 1e-7);
  EXPECT_LT(oracle::relative_error(net.vjp_params(z, g), fd), 1e-5);
}

TEST(VjpParams, Linearity) {
  const Generator net = tanh_net(29);
  const Vector<double> z = vec({0.5, -0.4, 0.9});
  const Vector<double> g1 = vec({1.0, 2.0});
  const Vector<double> g2 = vec({-0.3, 0.7});
  const Vector<double> lhs = net.vjp_params(z, 2.5 * g1 - 1.5 * g2);
  const Vector<double> rhs = 2.5 * net.vjp_params(z, g1) - 1.5 * net.vjp_params(z, g2);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(VjpInput, SingleAffineLayer) {
  Generator net({3, 2}, {});
  std::mt19937_64 rng(6);
  net.set_params(oracle::random_points(net.num_params(), 1, rng).col(0));
  const Vector<double> g = vec({0.7, -2.0});
  const Vector<double> expected = Matrix<double>(net.weight(0)).transpose() * g;
  EXPECT_LT((net.vjp_input(vec({1.0, 2.0, 3.0}), g) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(VjpInput, IdentityNet) {
  const Generator net = identity_net();
  EXPECT_DOUBLE_EQ(net.vjp_input(vec({4.0}), vec({-0.25}))(0), -0.25);
}

TEST(VjpInput, FiniteDifferences) {
  const Generator net = tanh_net(37);
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector<double> z = oracle::random_points(3, 1, rng).col(0);
    const Vector<double> g = oracle::random_points(2, 1, rng).col(0);
    const Vector<double> fd = oracle::central_difference(
        [&](const Vector<double> &p) { return g.dot(net(p)); }, z, 1e-6);
    EXPECT_LT(oracle::relative_error(net.vjp_input(z, g), fd), 1e-5);
  }
}

TEST(Backward, BatchSumsParamsAndKeepsInputsPerColumn) {
  const Generator net = tanh_net(41);
  std::mt19937_64 rng(42);
  const Matrix<double> z = oracle::random_points(3, 4, rng);
  const Matrix<double> g = oracle::random_points(2, 4, rng);
  const auto cot = net.backward(net.forward_batch(z), g);
  Vector<double> sum = Vector<double>::Zero(net.num_params());
  for (Index j = 0; j < 4; ++j) {
    sum += net.vjp_params(z.col(j), g.col(j));
    EXPECT_LT((cot.inputs.col(j) - net.vjp_input(z.col(j), g.col(j))).norm(), 1e-14);
  }
  EXPECT_LT((cot.params - sum).norm(), 1e-13);
  EXPECT_THROW(net.backward(net.forward_batch(z), Matrix<double>::Zero(2, 3)),
               std::invalid_argument);
}
