#ifndef SINKGAN_SINKHORN_HPP
#define SINKGAN_SINKHORN_HPP

#include "sinkgan/measure.hpp"
#include "sinkgan/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace sinkgan {

// Entropic optimal transport with cost c(x, y) = s * |x - y|^2 (s = 1 by
// default). All iterations run on log-domain potentials; kernels are never
// exponentiated without first subtracting the row maximum.

template <typename Scalar>
struct SinkhornOptions {
  Scalar tol = Scalar(1e-9);  // L1 marginal violation
  int max_iter = 10000;
  Scalar cost_scale = Scalar(1);
  // Relaxation weight w in [1, 2): each potential moves to
  // (1 - w) old + w update. w = 1 is plain Sinkhorn-Knopp.
  Scalar relaxation = Scalar(1);
};

enum class Side { first, second };

template <typename Scalar>
struct SinkhornPotentials {
  Vector<Scalar> u;  // on mu's support
  Vector<Scalar> v;  // on nu's support
  Scalar epsilon;
  Scalar cost_scale;
  DiscreteMeasure<Scalar> mu;
  DiscreteMeasure<Scalar> nu;
  bool converged;
  int iterations;
  Scalar marginal_violation;
};

template <typename Scalar>
struct TransportPlan {
  Matrix<Scalar> matrix;

  Vector<Scalar> row_sums() const { return matrix.rowwise().sum(); }
  Vector<Scalar> col_sums() const { return matrix.colwise().sum().transpose(); }
};

namespace detail {

/// Calls consume(i, logits) for every row i of `at`, where
/// logits(j) = h(j) - s |at_i - from_j|^2 / eps. Rows are independent and may
/// be processed concurrently.
template <typename Scalar, typename Consume>
void for_each_logit_row(const Matrix<Scalar> &at, const Matrix<Scalar> &from,
                        const Vector<Scalar> &h, Scalar eps, Scalar cost_scale,
                        Consume &&consume) {
  using Arr = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Index n = at.rows();
  const Index m = from.rows();
  const Index d = at.cols();
  const Index grain = std::max<Index>(1, 16384 / std::max<Index>(m, 1));
  const Scalar scale = cost_scale / eps;
  parallel_for(n, grain, [&](Index r0, Index r1) {
    Arr logits(m);
    for (Index i = r0; i < r1; ++i) {
      logits = h.array();
      for (Index k = 0; k < d; ++k) {
        logits -= scale * (from.col(k).array() - at(i, k)).square();
      }
      consume(i, logits);
    }
  });
}

/// out_i = -eps log sum_j exp(h_j - s |at_i - from_j|^2 / eps)
template <typename Scalar>
Vector<Scalar> softmin(const Matrix<Scalar> &at, const Matrix<Scalar> &from,
                       const Vector<Scalar> &h, Scalar eps, Scalar cost_scale) {
  Vector<Scalar> out(at.rows());
  for_each_logit_row<Scalar>(at, from, h, eps, cost_scale,
                             [&](Index i, const auto &logits) {
                               const Scalar mx = logits.maxCoeff();
                               const Scalar sum = (logits - mx).exp().sum();
                               out(i) = -eps * (mx + std::log(sum));
                             });
  return out;
}

/// Gradient of the softmin in `at`: 2 s (at_i - sum_j p_ij from_j) where p_i
/// is the softmax of the logits row.
template <typename Scalar>
Matrix<Scalar> softmin_gradient(const Matrix<Scalar> &at,
                                const Matrix<Scalar> &from,
                                const Vector<Scalar> &h, Scalar eps,
                                Scalar cost_scale) {
  Matrix<Scalar> out(at.rows(), at.cols());
  for_each_logit_row<Scalar>(
      at, from, h, eps, cost_scale, [&](Index i, auto &logits) {
        const Scalar mx = logits.maxCoeff();
        logits = (logits - mx).exp();
        logits /= logits.sum();
        for (Index k = 0; k < at.cols(); ++k) {
          out(i, k) = Scalar(2) * cost_scale *
                      (at(i, k) - (logits * from.col(k).array()).sum());
        }
      });
  return out;
}

template <typename Scalar>
Vector<Scalar> log_weights(const DiscreteMeasure<Scalar> &m) {
  return m.weights().array().log().matrix();
}

/// sum_i w_i |exp((current_i - updated_i) / eps) - 1|, the L1 marginal error
/// of the plan whose other potential produced `updated`.
template <typename Scalar>
Scalar marginal_error(const Vector<Scalar> &w, const Vector<Scalar> &current,
                      const Vector<Scalar> &updated, Scalar eps) {
  return w.dot((((current - updated).array() / eps).exp() - Scalar(1))
                   .abs()
                   .matrix());
}

template <typename Scalar>
void check_problem(const DiscreteMeasure<Scalar> &mu,
                   const DiscreteMeasure<Scalar> &nu, Scalar eps,
                   const SinkhornOptions<Scalar> &opts) {
  if (!(eps > Scalar(0))) {
    throw std::invalid_argument("sinkhorn: epsilon must be > 0");
  }
  if (!(opts.tol > Scalar(0))) {
    throw std::invalid_argument("sinkhorn: tol must be > 0");
  }
  if (!(opts.relaxation >= Scalar(1) && opts.relaxation < Scalar(2))) {
    throw std::invalid_argument("sinkhorn: relaxation must be in [1, 2)");
  }
  if (!(opts.cost_scale > Scalar(0))) {
    throw std::invalid_argument("sinkhorn: cost scale must be > 0");
  }
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("sinkhorn: dimension mismatch " +
                                std::to_string(mu.dim()) + " vs " +
                                std::to_string(nu.dim()));
  }
}

}  // namespace detail

/// Initial (u, v) for a warm start; sizes must match the two supports.
template <typename Scalar>
struct WarmStart {
  Vector<Scalar> u;
  Vector<Scalar> v;
};

/// Log-domain Sinkhorn-Knopp. Returns potentials anchored so that
/// <u, mu> = <v, nu>. Running out of iterations is reported through
/// `converged`, not an exception.
template <typename Scalar>
SinkhornPotentials<Scalar> sinkhorn_knopp(
    const DiscreteMeasure<Scalar> &mu, const DiscreteMeasure<Scalar> &nu,
    Scalar eps, const SinkhornOptions<Scalar> &opts = {},
    const std::optional<WarmStart<std::type_identity_t<Scalar>>> &init = std::nullopt) {
  detail::check_problem(mu, nu, eps, opts);
  const Scalar s = opts.cost_scale;
  const Vector<Scalar> la = detail::log_weights(mu);
  const Vector<Scalar> lb = detail::log_weights(nu);

  Vector<Scalar> g = Vector<Scalar>::Zero(nu.size());
  if (init) {
    if (init->v.size() != nu.size() || init->u.size() != mu.size()) {
      throw std::invalid_argument("sinkhorn: warm start size mismatch");
    }
    if (init->v.allFinite()) {
      g = init->v;
    }
  }
  auto update_u = [&](const Vector<Scalar> &v) {
    return detail::softmin<Scalar>(mu.points(), nu.points(),
                                   (lb.array() + v.array() / eps).matrix(), eps, s);
  };
  auto update_v = [&](const Vector<Scalar> &u) {
    return detail::softmin<Scalar>(nu.points(), mu.points(),
                                   (la.array() + u.array() / eps).matrix(), eps, s);
  };

  // The convergence check always measures the plan (update_u(g), g), whose
  // row sums are exact; its column error is read off update_v.
  const Scalar w = opts.relaxation;
  const int check_every = (w == Scalar(1)) ? 1 : 10;
  Vector<Scalar> f = update_u(g);
  bool converged = false;
  Scalar col_error = std::numeric_limits<Scalar>::infinity();
  int it = 0;
  while (it < opts.max_iter) {
    ++it;
    if (w == Scalar(1)) {
      Vector<Scalar> g_next = update_v(f);
      col_error = detail::marginal_error(nu.weights(), g, g_next, eps);
      if (col_error <= opts.tol) {
        converged = true;
        break;
      }
      g = std::move(g_next);
      f = update_u(g);
      continue;
    }
    g += w * (update_v(f) - g);
    f += w * (update_u(g) - f);
    if (it % check_every == 0 || it == opts.max_iter) {
      const Vector<Scalar> f_exact = update_u(g);
      col_error =
          detail::marginal_error(nu.weights(), g, update_v(f_exact), eps);
      if (col_error <= opts.tol) {
        f = f_exact;
        converged = true;
        break;
      }
    }
  }
  if (w != Scalar(1) && !converged) {
    f = update_u(g);
  }
  // f is an exact u-update of g, so the row error is rounding level.
  const Scalar row_error =
      detail::marginal_error(mu.weights(), f, update_u(g), eps);
  const Scalar violation = std::max(row_error, col_error);

  const Scalar shift = (mu.weights().dot(f) - nu.weights().dot(g)) / Scalar(2);
  f.array() -= shift;
  g.array() += shift;
  return SinkhornPotentials<Scalar>{std::move(f), std::move(g), eps, s, mu, nu,
                                    converged && violation <= opts.tol, it,
                                    violation};
}

/// Symmetric potential of OT_eps(mu, mu) by the averaged fixed point
/// u <- (u + T(u)) / 2. Returned u and v are identical.
template <typename Scalar>
SinkhornPotentials<Scalar> autocorrelation_potential(
    const DiscreteMeasure<Scalar> &mu, Scalar eps,
    const SinkhornOptions<Scalar> &opts = {},
    const std::optional<Vector<std::type_identity_t<Scalar>>> &init = std::nullopt) {
  detail::check_problem(mu, mu, eps, opts);
  const Scalar s = opts.cost_scale;
  const Vector<Scalar> la = detail::log_weights(mu);
  Vector<Scalar> u = Vector<Scalar>::Zero(mu.size());
  if (init) {
    if (init->size() != mu.size()) {
      throw std::invalid_argument("autocorrelation: warm start size mismatch");
    }
    if (init->allFinite()) {
      u = *init;
    }
  }
  bool converged = false;
  Scalar error = std::numeric_limits<Scalar>::infinity();
  int it = 0;
  while (it < opts.max_iter) {
    ++it;
    const Vector<Scalar> t = detail::softmin<Scalar>(
        mu.points(), mu.points(), (la.array() + u.array() / eps).matrix(), eps, s);
    error = detail::marginal_error(mu.weights(), u, t, eps);
    if (error <= opts.tol) {
      converged = true;
      break;
    }
    u = Scalar(0.5) * (u + t);
  }
  Vector<Scalar> v = u;
  return SinkhornPotentials<Scalar>{std::move(u), std::move(v), eps, s, mu, mu,
                                    converged, it, error};
}

/// OT_eps value <u, mu> + <v, nu>. At a Sinkhorn fixed point this equals the
/// primal objective <C, pi> + eps KL(pi | mu x nu).
template <typename Scalar>
Scalar ot_eps(const SinkhornPotentials<Scalar> &pot) {
  return pot.mu.weights().dot(pot.u) + pot.nu.weights().dot(pot.v);
}

template <typename Scalar>
TransportPlan<Scalar> plan_from_potentials(const SinkhornPotentials<Scalar> &pot) {
  const Vector<Scalar> h =
      (detail::log_weights(pot.nu).array() + pot.v.array() / pot.epsilon).matrix();
  Matrix<Scalar> plan(pot.mu.size(), pot.nu.size());
  const Vector<Scalar> row_log =
      (detail::log_weights(pot.mu).array() + pot.u.array() / pot.epsilon).matrix();
  detail::for_each_logit_row<Scalar>(
      pot.mu.points(), pot.nu.points(), h, pot.epsilon, pot.cost_scale,
      [&](Index i, const auto &logits) {
        plan.row(i) = (logits + row_log(i)).exp().matrix().transpose();
      });
  return TransportPlan<Scalar>{std::move(plan)};
}

namespace detail {
template <typename Scalar>
void check_query(const SinkhornPotentials<Scalar> &pot, Index cols) {
  if (cols != pot.mu.dim()) {
    throw std::invalid_argument("potential extension: query dimension " +
                                std::to_string(cols) + ", expected " +
                                std::to_string(pot.mu.dim()));
  }
}

/// (support, log-weights + potential / eps) of the side opposite to `side`.
template <typename Scalar>
std::pair<const Matrix<Scalar> &, Vector<Scalar>> opposite(
    const SinkhornPotentials<Scalar> &pot, Side side) {
  if (side == Side::first) {
    return {pot.nu.points(),
            (log_weights(pot.nu).array() + pot.v.array() / pot.epsilon).matrix()};
  }
  return {pot.mu.points(),
          (log_weights(pot.mu).array() + pot.u.array() / pot.epsilon).matrix()};
}
}  // namespace detail

/// Off-support extension of u (side first) or v (side second) at each row of
/// `x`: u(x) = -eps log sum_j w'_j exp((v_j - c(x, y_j)) / eps).
template <typename Scalar>
Vector<Scalar> extend_potential(const SinkhornPotentials<Scalar> &pot,
                                const Matrix<Scalar> &x, Side side) {
  detail::check_query(pot, x.cols());
  const auto [support, h] = detail::opposite(pot, side);
  return detail::softmin<Scalar>(x, support, h, pot.epsilon, pot.cost_scale);
}

template <typename Scalar>
Scalar extend_potential(const SinkhornPotentials<Scalar> &pot,
                        const Vector<Scalar> &x, Side side) {
  return extend_potential(pot, Matrix<Scalar>(x.transpose()), side)(0);
}

/// Spatial gradient of the extended potential at each row of `x`.
template <typename Scalar>
Matrix<Scalar> grad_extended_potential(const SinkhornPotentials<Scalar> &pot,
                                       const Matrix<Scalar> &x, Side side) {
  detail::check_query(pot, x.cols());
  const auto [support, h] = detail::opposite(pot, side);
  return detail::softmin_gradient<Scalar>(x, support, h, pot.epsilon,
                                          pot.cost_scale);
}

template <typename Scalar>
Vector<Scalar> grad_extended_potential(const SinkhornPotentials<Scalar> &pot,
                                       const Vector<Scalar> &x, Side side) {
  return grad_extended_potential(pot, Matrix<Scalar>(x.transpose()), side)
      .row(0)
      .transpose();
}

template <typename Scalar>
struct DivergenceReport {
  Scalar value;      // clamped
  Scalar raw;        // before clamping
  Scalar ot_cross;
  Scalar ot_first;   // OT_eps(mu, mu)
  Scalar ot_second;  // OT_eps(nu, nu)
  bool converged;    // all three solves converged
  bool clamped;
};

/// S_eps(mu, nu) = OT(mu, nu) - OT(mu, mu)/2 - OT(nu, nu)/2. Results in
/// [-10 tol, 0) are clamped to zero.
template <typename Scalar>
DivergenceReport<Scalar> sinkhorn_divergence_report(
    const DiscreteMeasure<Scalar> &mu, const DiscreteMeasure<Scalar> &nu,
    Scalar eps, const SinkhornOptions<Scalar> &opts = {}) {
  const auto cross = sinkhorn_knopp(mu, nu, eps, opts);
  const auto aa = autocorrelation_potential(mu, eps, opts);
  const auto bb = autocorrelation_potential(nu, eps, opts);
  DivergenceReport<Scalar> r{};
  r.ot_cross = ot_eps(cross);
  r.ot_first = ot_eps(aa);
  r.ot_second = ot_eps(bb);
  r.raw = r.ot_cross - Scalar(0.5) * (r.ot_first + r.ot_second);
  r.converged = cross.converged && aa.converged && bb.converged;
  r.value = r.raw;
  r.clamped = false;
  if (r.raw < Scalar(0) && r.raw >= -Scalar(10) * opts.tol) {
    r.value = Scalar(0);
    r.clamped = true;
  }
  return r;
}

template <typename Scalar>
Scalar sinkhorn_divergence(const DiscreteMeasure<Scalar> &mu,
                           const DiscreteMeasure<Scalar> &nu, Scalar eps,
                           const SinkhornOptions<Scalar> &opts = {}) {
  return sinkhorn_divergence_report(mu, nu, eps, opts).value;
}

}  // namespace sinkgan

#endif  // SINKGAN_SINKHORN_HPP
