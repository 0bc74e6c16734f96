/*
 * Copyright 2026 The prefopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef PREFOPT_ESTIMATOR_HPP_
#define PREFOPT_ESTIMATOR_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "prefopt/history.hpp"
#include "prefopt/kernel.hpp"
#include "prefopt/sigmoid.hpp"

namespace prefopt {

// Regularized kernel logistic regression in representer form.
//
// With z = K_t alpha the per-record logits (K_t = E Kg E^T, see History),
//
//   loss(alpha) = sum_r [softplus(z_r) - y_r z_r] + lambda/2 |alpha|^2,
//   grad        = K_t (s(z) - y) + lambda alpha,
//   hess        = K_t diag(s'(z)) K_t + lambda I.
//
// In dueling mode K_t is the dueling-kernel Gram matrix, so the same code
// fits h(x, x') = g(x) - g(x') with g = Kg E^T alpha.

template <typename Scalar>
struct EstimatorFit {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector alpha;
  Scalar grad_norm = Scalar(0);
  Scalar lambda = Scalar(1);
  int iterations = 0;
  bool converged = true;
  /// Set when a Newton direction could not be used and the solver fell back
  /// to gradient steps.
  bool gradient_fallback = false;
};

template <typename Scalar>
struct FitOptions {
  Scalar tolerance = Scalar(1e-8);
  int max_iterations = 100;
};

namespace detail {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("estimator: lambda must be positive and finite");
  }
}

template <typename Scalar, typename Derived>
void check_alpha(const Eigen::MatrixBase<Derived>& alpha, const History& hist) {
  if (alpha.size() != hist.size()) {
    throw std::invalid_argument("estimator: alpha length must equal history length");
  }
}

}  // namespace detail

/// g = Kg E^T alpha: the fitted utility on every grid action. In direct mode
/// this is f_t on the grid; in dueling mode h_t(i, j) = g(i) - g(j).
template <typename Scalar, typename Derived>
detail::Vec<Scalar> grid_utility(const Eigen::MatrixBase<Derived>& alpha,
                                 const History& hist, const GridKernel<Scalar>& grid) {
  detail::Vec<Scalar> coeffs;
  hist.scatter(alpha, coeffs);
  return grid.gram() * coeffs;
}

/// K_t alpha.
template <typename Scalar, typename Derived>
detail::Vec<Scalar> kernel_times(const Eigen::MatrixBase<Derived>& alpha,
                                 const History& hist, const GridKernel<Scalar>& grid) {
  detail::Vec<Scalar> z;
  hist.gather(grid_utility<Scalar>(alpha, hist, grid), z);
  return z;
}

/// Dense K_t; O(t^2) memory, used for small histories and in tests.
template <typename Scalar>
detail::Mat<Scalar> history_gram(const History& hist, const GridKernel<Scalar>& grid) {
  const Eigen::Index t = hist.size();
  detail::Mat<Scalar> k(t, t);
  detail::Vec<Scalar> col;
  for (Eigen::Index r = 0; r < t; ++r) {
    const Record& rec = hist[r];
    detail::Vec<Scalar> against = grid.gram().col(rec.first);
    if (hist.mode() == FeedbackMode::kDueling) against -= grid.gram().col(rec.second);
    hist.gather(against, col);
    k.col(r) = col;
  }
  return Scalar(0.5) * (k + k.transpose());
}

template <typename Scalar, typename Derived>
Scalar loss(const Eigen::MatrixBase<Derived>& alpha, const History& hist,
            const GridKernel<Scalar>& grid, Scalar lambda) {
  detail::check_lambda(static_cast<double>(lambda));
  detail::check_alpha<Scalar>(alpha, hist);
  if (hist.empty()) return Scalar(0);
  const detail::Vec<Scalar> z = kernel_times<Scalar>(alpha, hist, grid);
  Scalar total(0);
  for (Eigen::Index r = 0; r < z.size(); ++r) {
    total += softplus(z(r)) - Scalar(hist[r].outcome) * z(r);
  }
  return total + Scalar(0.5) * lambda * alpha.squaredNorm();
}

template <typename Scalar, typename Derived>
detail::Vec<Scalar> loss_gradient(const Eigen::MatrixBase<Derived>& alpha, const History& hist,
                                  const GridKernel<Scalar>& grid, Scalar lambda) {
  detail::check_lambda(static_cast<double>(lambda));
  detail::check_alpha<Scalar>(alpha, hist);
  if (hist.empty()) return detail::Vec<Scalar>();
  const detail::Vec<Scalar> z = kernel_times<Scalar>(alpha, hist, grid);
  detail::Vec<Scalar> residual(z.size());
  for (Eigen::Index r = 0; r < z.size(); ++r) {
    residual(r) = sigmoid(z(r)) - Scalar(hist[r].outcome);
  }
  return kernel_times<Scalar>(residual, hist, grid) + lambda * alpha;
}

namespace detail {

// Solves (K W K + lambda I) d = rhs. For t <= n the t x t system is formed
// directly; otherwise the grid-space Woodbury identity
//   (lambda I + E Q E^T)^{-1} = (I - E (lambda I + Q N)^{-1} Q E^T) / lambda,
// with Q = Kg (E^T W E) Kg and N = E^T E, costs O(t + n^3).
template <typename Scalar>
std::optional<Vec<Scalar>> newton_solve(const History& hist, const GridKernel<Scalar>& grid,
                                        const Vec<Scalar>& weights, Scalar lambda,
                                        const Vec<Scalar>& rhs) {
  const Eigen::Index t = hist.size();
  const Eigen::Index n = grid.size();
  if (t <= n) {
    const Mat<Scalar> k = history_gram(hist, grid);
    Mat<Scalar> h = k * weights.asDiagonal() * k;
    h.diagonal().array() += lambda;
    Eigen::LLT<Mat<Scalar>> llt(h);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Vec<Scalar> d = llt.solve(rhs);
    if (!d.allFinite()) return std::nullopt;
    return d;
  }
  Mat<Scalar> p = Mat<Scalar>::Zero(n, n);
  Mat<Scalar> counts = Mat<Scalar>::Zero(n, n);
  const bool dueling = hist.mode() == FeedbackMode::kDueling;
  for (Eigen::Index r = 0; r < t; ++r) {
    const Record& rec = hist[r];
    const Eigen::Index i = rec.first;
    const Eigen::Index j = rec.second;
    auto add = [&](Mat<Scalar>& m, Scalar w) {
      m(i, i) += w;
      if (dueling) {
        m(j, j) += w;
        m(i, j) -= w;
        m(j, i) -= w;
      }
    };
    add(p, weights(r));
    add(counts, Scalar(1));
  }
  const Mat<Scalar> q = grid.gram() * p * grid.gram();
  Mat<Scalar> m = q * counts;
  m.diagonal().array() += lambda;
  Vec<Scalar> projected;
  hist.scatter(rhs, projected);
  const Vec<Scalar> inner = m.partialPivLu().solve(q * projected);
  Vec<Scalar> back;
  hist.gather(inner, back);
  Vec<Scalar> d = (rhs - back) / lambda;
  if (!d.allFinite()) return std::nullopt;
  return d;
}

}  // namespace detail

/// Damped Newton minimization of the regularized loss. Starts from
/// `warm_start` (zero-padded to the history length) when given. Stops when
/// the gradient norm reaches `options.tolerance` or after
/// `options.max_iterations`, flagging non-convergence in the result.
template <typename Scalar>
EstimatorFit<Scalar> fit(const History& hist, const GridKernel<Scalar>& grid, Scalar lambda,
                         const std::optional<detail::Vec<Scalar>>& warm_start = std::nullopt,
                         const FitOptions<Scalar>& options = {}) {
  detail::check_lambda(static_cast<double>(lambda));
  using Vector = detail::Vec<Scalar>;
  EstimatorFit<Scalar> result;
  result.lambda = lambda;
  const Eigen::Index t = hist.size();
  result.alpha = Vector::Zero(t);
  if (t == 0) return result;
  if (warm_start) {
    if (warm_start->size() > t) {
      throw std::invalid_argument("fit: warm start longer than history");
    }
    result.alpha.head(warm_start->size()) = *warm_start;
  }

  Vector alpha = result.alpha;
  Vector z = kernel_times<Scalar>(alpha, hist, grid);
  const Vector y = hist.outcomes<Scalar>();
  auto objective = [&](const Vector& logits, const Vector& a) {
    Scalar total(0);
    for (Eigen::Index r = 0; r < t; ++r) total += softplus(logits(r)) - y(r) * logits(r);
    return total + Scalar(0.5) * lambda * a.squaredNorm();
  };
  Scalar value = objective(z, alpha);
  Vector grad;
  Vector weights(t);
  Vector residual(t);
  int iter = 0;
  bool converged = false;
  for (;; ++iter) {
    for (Eigen::Index r = 0; r < t; ++r) {
      const Scalar p = sigmoid(z(r));
      residual(r) = p - y(r);
      weights(r) = p * (Scalar(1) - p);
    }
    grad = kernel_times<Scalar>(residual, hist, grid) + lambda * alpha;
    if (grad.norm() <= options.tolerance) {
      converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    Vector direction;
    bool newton = true;
    if (auto d = detail::newton_solve<Scalar>(hist, grid, weights, lambda, Vector(-grad))) {
      direction = std::move(*d);
    }
    if (direction.size() == 0 || !(grad.dot(direction) < Scalar(0))) {
      direction = -grad;
      newton = false;
      result.gradient_fallback = true;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const Scalar slope = grad.dot(direction);
      const Vector kd = kernel_times<Scalar>(direction, hist, grid);
      Scalar step(1);
      for (int halving = 0; halving < 60; ++halving, step *= Scalar(0.5)) {
        const Vector trial_alpha = alpha + step * direction;
        const Vector trial_z = z + step * kd;
        const Scalar trial_value = objective(trial_z, trial_alpha);
        // Close to the minimizer the decrease drops below the resolution of
        // the loss; a full Newton step is then taken on the gradient alone.
        const bool unresolved =
            newton && halving == 0 &&
            trial_value <= value + Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::abs(value);
        if (trial_value <= value + Scalar(1e-4) * step * slope || unresolved) {
          // Round-off can leave the Armijo test satisfied with no actual
          // decrease; only a strict decrease counts as progress.
          if (trial_value < value || newton) {
            alpha = trial_alpha;
            z = trial_z;
            value = trial_value;
            accepted = true;
          }
          break;
        }
      }
      if (!accepted && newton) {
        direction = -grad;
        newton = false;
        result.gradient_fallback = true;
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) break;
  }
  result.alpha = std::move(alpha);
  result.grad_norm = grad.norm();
  result.iterations = iter;
  result.converged = converged;
  return result;
}

/// f_t(first) in direct mode, h_t(first, second) in dueling mode.
template <typename Scalar>
Scalar predict(const EstimatorFit<Scalar>& fitted, const History& hist,
               const GridKernel<Scalar>& grid, Eigen::Index first, Eigen::Index second) {
  if (fitted.alpha.size() == 0) return Scalar(0);
  const detail::Vec<Scalar> g = grid_utility<Scalar>(fitted.alpha, hist, grid);
  if (hist.mode() == FeedbackMode::kDirect) return g(first);
  if (first == second) return Scalar(0);
  return g(first) - g(second);
}

template <typename Scalar>
Scalar predict_prob(const EstimatorFit<Scalar>& fitted, const History& hist,
                    const GridKernel<Scalar>& grid, Eigen::Index first, Eigen::Index second) {
  return sigmoid(predict(fitted, hist, grid, first, second));
}

/// sqrt(alpha^T K_t alpha), the RKHS norm of the fitted function.
template <typename Scalar>
Scalar rkhs_norm(const EstimatorFit<Scalar>& fitted, const History& hist,
                 const GridKernel<Scalar>& grid) {
  if (fitted.alpha.size() == 0) return Scalar(0);
  const Scalar q = fitted.alpha.dot(kernel_times<Scalar>(fitted.alpha, hist, grid));
  return std::sqrt(std::max(Scalar(0), q));
}

}  // namespace prefopt

#endif  // PREFOPT_ESTIMATOR_HPP_
