#ifndef SINKGAN_GENERATOR_HPP
#define SINKGAN_GENERATOR_HPP

#include "sinkgan/measure.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sinkgan {

enum class Activation : std::uint8_t { identity = 0, relu = 1, tanh = 2 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
  }
  return "unknown";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "tanh" || s == "sigmoid") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(s) +
                              "' (expected relu, tanh or identity)");
}

/// Activations and pre-activations retained by a batched forward pass.
/// Column j of every matrix belongs to input j.
template <typename Scalar>
struct ForwardTape {
  std::vector<Matrix<Scalar>> outputs;         // outputs[0] = inputs
  std::vector<Matrix<Scalar>> pre_activations;  // one per layer
};

template <typename Scalar>
struct BatchCotangents {
  Vector<Scalar> params;  // summed over the batch
  Matrix<Scalar> inputs;  // k x batch
};

/// Dense feed-forward map T_theta: R^k -> R^d.
///
/// Parameters live in one flat vector, layer after layer; each layer stores
/// its out x in weight matrix row-major followed by its bias. Hidden layers
/// apply their activation, the output layer is affine. ReLU has derivative 0
/// at 0.
template <typename Scalar>
class GeneratorNetwork {
 public:
  using RowMajorMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using WeightMap = Eigen::Map<RowMajorMatrix>;
  using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;

  GeneratorNetwork(std::vector<Index> layer_dims,
                   std::vector<Activation> activations)
      : dims_(std::move(layer_dims)), activations_(std::move(activations)) {
    if (dims_.size() < 2) {
      throw std::invalid_argument("generator: need at least input and output dims");
    }
    for (Index d : dims_) {
      if (d < 1) {
        throw std::invalid_argument("generator: layer dims must be positive");
      }
    }
    if (activations_.size() != dims_.size() - 2) {
      throw std::invalid_argument(
          "generator: " + std::to_string(dims_.size() - 2) +
          " hidden layers but " + std::to_string(activations_.size()) +
          " activations");
    }
    Index total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(total);
      total += dims_[l] * dims_[l + 1] + dims_[l + 1];
    }
    params_ = Vector<Scalar>::Zero(total);
  }

  Index input_dim() const { return dims_.front(); }
  Index output_dim() const { return dims_.back(); }
  Index num_layers() const { return Index(dims_.size()) - 1; }
  Index num_params() const { return params_.size(); }
  const std::vector<Index> &layer_dims() const { return dims_; }
  const std::vector<Activation> &activations() const { return activations_; }

  const Vector<Scalar> &params() const { return params_; }
  Vector<Scalar> &params() { return params_; }
  void set_params(const Vector<Scalar> &p) {
    if (p.size() != params_.size()) {
      throw std::invalid_argument("generator: expected " +
                                  std::to_string(params_.size()) +
                                  " parameters, got " + std::to_string(p.size()));
    }
    params_ = p;
  }

  ConstWeightMap weight(Index l) const {
    return ConstWeightMap(params_.data() + offsets_[l], dims_[l + 1], dims_[l]);
  }
  WeightMap weight(Index l) {
    return WeightMap(params_.data() + offsets_[l], dims_[l + 1], dims_[l]);
  }
  auto bias(Index l) const {
    return params_.segment(offsets_[l] + dims_[l] * dims_[l + 1], dims_[l + 1]);
  }
  auto bias(Index l) { return params_.segment(offsets_[l] + dims_[l] * dims_[l + 1], dims_[l + 1]); }

  /// Offset of layer l's block inside the flat parameter vector.
  Index param_offset(Index l) const { return offsets_[l]; }

  /// Batched forward pass over the columns of `z` (k x batch).
  ForwardTape<Scalar> forward_batch(const Matrix<Scalar> &z) const {
    check_input(z.rows());
    ForwardTape<Scalar> tape;
    tape.outputs.reserve(dims_.size());
    tape.pre_activations.reserve(dims_.size() - 1);
    tape.outputs.push_back(z);
    for (Index l = 0; l < num_layers(); ++l) {
      Matrix<Scalar> pre = weight(l) * tape.outputs.back();
      pre.colwise() += bias(l);
      Matrix<Scalar> out = apply(layer_activation(l), pre);
      tape.pre_activations.push_back(std::move(pre));
      tape.outputs.push_back(std::move(out));
    }
    return tape;
  }

  /// Columns of the result are T(z_j).
  Matrix<Scalar> apply_batch(const Matrix<Scalar> &z) const {
    check_input(z.rows());
    Matrix<Scalar> h = z;
    for (Index l = 0; l < num_layers(); ++l) {
      Matrix<Scalar> pre = weight(l) * h;
      pre.colwise() += bias(l);
      h = apply(layer_activation(l), pre);
    }
    return h;
  }

  Vector<Scalar> forward(const Vector<Scalar> &z) const {
    return apply_batch(Matrix<Scalar>(z));
  }

  Vector<Scalar> operator()(const Vector<Scalar> &z) const { return forward(z); }

  /// Reverse pass: for cotangents g (d x batch) returns sum_j g_j^T dT/dtheta
  /// (z_j) and the per-column input products g_j^T dT/dz (z_j).
  BatchCotangents<Scalar> backward(const ForwardTape<Scalar> &tape,
                                   const Matrix<Scalar> &g) const {
    if (g.rows() != output_dim() || g.cols() != tape.outputs.front().cols()) {
      throw std::invalid_argument("generator: cotangent shape mismatch");
    }
    BatchCotangents<Scalar> out;
    out.params = Vector<Scalar>::Zero(num_params());
    Matrix<Scalar> delta = g;
    for (Index l = num_layers() - 1; l >= 0; --l) {
      if (l < num_layers() - 1) {
        delta.array() *= derivative(layer_activation(l), tape.pre_activations[l],
                                    tape.outputs[l + 1]);
      }
      WeightMap gw(out.params.data() + offsets_[l], dims_[l + 1], dims_[l]);
      gw.noalias() = delta * tape.outputs[l].transpose();
      out.params.segment(offsets_[l] + dims_[l] * dims_[l + 1], dims_[l + 1]) =
          delta.rowwise().sum();
      delta = weight(l).transpose() * delta;
    }
    out.inputs = std::move(delta);
    return out;
  }

  /// g^T dT/dtheta at z.
  Vector<Scalar> vjp_params(const Vector<Scalar> &z, const Vector<Scalar> &g) const {
    return backward(forward_batch(Matrix<Scalar>(z)), Matrix<Scalar>(g)).params;
  }

  /// g^T dT/dz at z.
  Vector<Scalar> vjp_input(const Vector<Scalar> &z, const Vector<Scalar> &g) const {
    return backward(forward_batch(Matrix<Scalar>(z)), Matrix<Scalar>(g)).inputs.col(0);
  }

 private:
  Activation layer_activation(Index l) const {
    return l < num_layers() - 1 ? activations_[std::size_t(l)] : Activation::identity;
  }

  void check_input(Index rows) const {
    if (rows != input_dim()) {
      throw std::invalid_argument("generator: input dimension " +
                                  std::to_string(rows) + ", expected " +
                                  std::to_string(input_dim()));
    }
  }

  static Matrix<Scalar> apply(Activation a, const Matrix<Scalar> &pre) {
    switch (a) {
      case Activation::relu:
        return pre.cwiseMax(Scalar(0));
      case Activation::tanh:
        return pre.array().tanh().matrix();
      case Activation::identity:
        break;
    }
    return pre;
  }

  static auto derivative(Activation a, const Matrix<Scalar> &pre,
                         const Matrix<Scalar> &out) {
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    switch (a) {
      case Activation::relu:
        return Arr((pre.array() > Scalar(0)).template cast<Scalar>());
      case Activation::tanh:
        return Arr(Scalar(1) - out.array().square());
      case Activation::identity:
        break;
    }
    return Arr(Arr::Ones(pre.rows(), pre.cols()));
  }

  std::vector<Index> dims_;
  std::vector<Activation> activations_;
  std::vector<Index> offsets_;
  Vector<Scalar> params_;
};

using Generator = GeneratorNetwork<double>;

/// Network with weights uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)),
/// and zero biases.
template <typename Scalar = double>
GeneratorNetwork<Scalar> mlp_new(std::vector<Index> layer_dims,
                                 std::vector<Activation> activations,
                                 std::uint64_t seed) {
  GeneratorNetwork<Scalar> net(std::move(layer_dims), std::move(activations));
  std::mt19937_64 rng(seed);
  for (Index l = 0; l < net.num_layers(); ++l) {
    const auto &dims = net.layer_dims();
    const double a = std::sqrt(6.0 / double(dims[l] + dims[l + 1]));
    std::uniform_real_distribution<double> dist(-a, a);
    auto w = net.weight(l);
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) {
        w(r, c) = Scalar(dist(rng));
      }
    }
  }
  return net;
}

}  // namespace sinkgan

#endif  // SINKGAN_GENERATOR_HPP
