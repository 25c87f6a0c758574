#ifndef SINKGAN_MEASURE_HPP
#define SINKGAN_MEASURE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sinkgan {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Weighted point cloud mu = sum_i w_i delta_{x_i} in R^d.
///
/// Points are stored one per row. Weights are nonnegative and sum to one;
/// duplicated support points are kept as separate atoms.
template <typename Scalar>
class DiscreteMeasure {
 public:
  using MatrixType = Matrix<Scalar>;
  using VectorType = Vector<Scalar>;

  DiscreteMeasure(MatrixType points, VectorType weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    validate();
  }

  /// Uniform weights 1/n.
  explicit DiscreteMeasure(MatrixType points) : points_(std::move(points)) {
    weights_ = VectorType::Constant(points_.rows(),
                                    Scalar(1) / Scalar(std::max<Index>(points_.rows(), 1)));
    validate();
  }

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }

  const MatrixType &points() const { return points_; }
  const VectorType &weights() const { return weights_; }

  auto point(Index i) const { return points_.row(i); }

  /// Sum of w_i f(x_i) for f taking a row vector.
  template <typename F>
  Scalar integrate(F &&f) const {
    Scalar acc(0);
    for (Index i = 0; i < size(); ++i) {
      acc += weights_(i) * Scalar(f(points_.row(i)));
    }
    return acc;
  }

  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mean() const {
    return weights_.transpose() * points_;
  }

  template <typename Other>
  DiscreteMeasure<Other> cast() const {
    return DiscreteMeasure<Other>(points_.template cast<Other>(),
                                  weights_.template cast<Other>());
  }

 private:
  void validate() {
    if (points_.rows() == 0) {
      throw std::invalid_argument("measure: empty support");
    }
    if (points_.cols() == 0) {
      throw std::invalid_argument("measure: points must have dimension >= 1");
    }
    if (weights_.size() != points_.rows()) {
      throw std::invalid_argument("measure: " + std::to_string(points_.rows()) +
                                  " points but " +
                                  std::to_string(weights_.size()) + " weights");
    }
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_(i) >= Scalar(0)) || !std::isfinite(double(weights_(i)))) {
        throw std::invalid_argument("measure: negative or non-finite weight at " +
                                    std::to_string(i));
      }
    }
    const Scalar total = weights_.sum();
    if (!(total > Scalar(0))) {
      throw std::invalid_argument("measure: all weights are zero");
    }
    weights_ /= total;
  }

  MatrixType points_;
  VectorType weights_;
};

using Measure = DiscreteMeasure<double>;

/// Builds a measure from rows of `points`; weights default to uniform and are
/// renormalized to sum to one when given.
template <typename Scalar>
DiscreteMeasure<Scalar> make_measure(Matrix<Scalar> points) {
  return DiscreteMeasure<Scalar>(std::move(points));
}

template <typename Scalar>
DiscreteMeasure<Scalar> make_measure(Matrix<Scalar> points,
                                     Vector<Scalar> weights) {
  return DiscreteMeasure<Scalar>(std::move(points), std::move(weights));
}

/// Builds a measure from a list of point vectors, checking that all share a
/// dimension.
template <typename Scalar>
DiscreteMeasure<Scalar> make_measure(const std::vector<std::vector<Scalar>> &points,
                                     const std::vector<Scalar> &weights = {}) {
  if (points.empty()) {
    throw std::invalid_argument("measure: empty support");
  }
  const auto d = points.front().size();
  Matrix<Scalar> m(static_cast<Index>(points.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw std::invalid_argument("measure: point " + std::to_string(i) +
                                  " has dimension " +
                                  std::to_string(points[i].size()) +
                                  ", expected " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      m(Index(i), Index(j)) = points[i][j];
    }
  }
  if (weights.empty()) {
    return DiscreteMeasure<Scalar>(std::move(m));
  }
  Vector<Scalar> w = Eigen::Map<const Vector<Scalar>>(
      weights.data(), static_cast<Index>(weights.size()));
  return DiscreteMeasure<Scalar>(std::move(m), std::move(w));
}

/// Braced point lists, e.g. make_measure<double>({{0, 1}, {2, 3}}).
template <typename Scalar>
DiscreteMeasure<Scalar> make_measure(
    std::initializer_list<std::initializer_list<Scalar>> points,
    std::initializer_list<Scalar> weights = {}) {
  std::vector<std::vector<Scalar>> rows;
  for (const auto &p : points) {
    rows.emplace_back(p);
  }
  return make_measure<Scalar>(rows, std::vector<Scalar>(weights));
}

namespace detail {
template <typename Map>
concept HasInputDim = requires(const Map &m) { m.input_dim(); };
}  // namespace detail

/// Pushforward T#mu: the atoms are mapped through `map`, weights are kept.
///
/// `map` takes a k-dimensional column vector and returns a d-dimensional one.
/// If the map exposes `input_dim()` it is checked against mu's dimension.
template <typename Scalar, typename Map>
DiscreteMeasure<Scalar> pushforward(const DiscreteMeasure<Scalar> &mu,
                                    const Map &map) {
  if constexpr (detail::HasInputDim<Map>) {
    if (Index(map.input_dim()) != mu.dim()) {
      throw std::invalid_argument("pushforward: measure has dimension " +
                                  std::to_string(mu.dim()) +
                                  " but map expects " +
                                  std::to_string(map.input_dim()));
    }
  }
  Matrix<Scalar> out;
  for (Index i = 0; i < mu.size(); ++i) {
    const Vector<Scalar> z = mu.points().row(i).transpose();
    const Vector<Scalar> x = map(z);
    if (i == 0) {
      out.resize(mu.size(), x.size());
    } else if (x.size() != out.cols()) {
      throw std::invalid_argument("pushforward: map output dimension changed");
    }
    out.row(i) = x.transpose();
  }
  return DiscreteMeasure<Scalar>(std::move(out), mu.weights());
}

/// sum_i w_i exp(|z_i|^2 / (2 k sigma^2)) with k the measure's own dimension.
/// A sigma-sub-Gaussian law keeps this at or below 2.
template <typename Scalar>
Scalar sub_gaussian_norm_estimate(const DiscreteMeasure<Scalar> &mu, Scalar sigma) {
  if (!(sigma > Scalar(0))) {
    throw std::invalid_argument("sub_gaussian_norm_estimate: sigma must be > 0");
  }
  const Scalar scale = Scalar(2) * Scalar(mu.dim()) * sigma * sigma;
  const Vector<Scalar> sq = mu.points().rowwise().squaredNorm();
  return mu.weights().dot((sq.array() / scale).exp().matrix());
}

/// Deterministic draw procedure (n, seed) -> n i.i.d. samples.
class Sampler {
 public:
  using Fn = std::function<Measure(Index, std::uint64_t)>;

  Sampler(Index dim, Fn fn, double sigma = 0.0)
      : dim_(dim), fn_(std::move(fn)), sigma_(sigma) {}

  Measure operator()(Index n, std::uint64_t seed) const {
    if (n < 1) {
      throw std::invalid_argument("sampler: n must be >= 1");
    }
    Measure m = fn_(n, seed);
    if (m.dim() != dim_) {
      throw std::logic_error("sampler: produced dimension " +
                             std::to_string(m.dim()) + ", declared " +
                             std::to_string(dim_));
    }
    return m;
  }

  Index dim() const { return dim_; }
  /// Sub-Gaussian parameter if known, 0 otherwise.
  double sigma() const { return sigma_; }

 private:
  Index dim_;
  Fn fn_;
  double sigma_;
};

}  // namespace sinkgan

#endif  // SINKGAN_MEASURE_HPP
