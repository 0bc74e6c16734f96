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

#ifndef PREFOPT_GRAM_HPP_
#define PREFOPT_GRAM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "prefopt/history.hpp"
#include "prefopt/kernel.hpp"

namespace prefopt {

/// Cholesky factor of (K_t + rho I), grown one point at a time.
///
/// Appends are rank-1 border updates costing O(t^2). Every
/// `refactor_interval` appends, and whenever a border pivot is not
/// positive, the factor is rebuilt from the stored matrix. The running value
/// of log det(I + K_t / rho) accumulates the per-append increments
/// log(d_t^2 / rho), each of which is nonnegative.
template <typename Scalar_>
class GramState {
 public:
  using Scalar = Scalar_;
  using Index = Eigen::Index;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr Index kDefaultRefactorInterval = 256;

  explicit GramState(Scalar rho, Index refactor_interval = kDefaultRefactorInterval)
      : rho_(rho), refactor_interval_(refactor_interval) {
    if (!(rho > Scalar(0)) || !std::isfinite(static_cast<double>(rho))) {
      throw std::invalid_argument("GramState: rho must be positive and finite");
    }
    if (refactor_interval_ <= 0) {
      throw std::invalid_argument("GramState: refactor interval must be positive");
    }
  }

  Index size() const { return size_; }
  Scalar rho() const { return rho_; }

  /// Adds a point whose kernel values against the existing points are
  /// `new_row` and whose regularized self-kernel is `diag` = k(x, x) + rho.
  template <typename Derived>
  void append(const Eigen::MatrixBase<Derived>& new_row, Scalar diag) {
    if (new_row.size() != size_) {
      throw std::invalid_argument("GramState::append: row length must equal current size");
    }
    if (!new_row.allFinite() || !std::isfinite(static_cast<double>(diag))) {
      throw std::domain_error("GramState::append: non-finite kernel values");
    }
    reserve(size_ + 1);
    const Index t = size_;
    matrix_.row(t).head(t) = new_row.transpose();
    matrix_.col(t).head(t) = new_row;
    matrix_(t, t) = diag;

    Scalar pivot_sq(0);
    bool need_full = false;
    if (t > 0) {
      Vector l = new_row;
      factor_.topLeftCorner(t, t).template triangularView<Eigen::Lower>().solveInPlace(l);
      factor_.row(t).head(t) = l.transpose();
      factor_.col(t).head(t).setZero();
      pivot_sq = diag - l.squaredNorm();
    } else {
      pivot_sq = diag;
    }
    if (pivot_sq > Scalar(0)) {
      factor_(t, t) = std::sqrt(pivot_sq);
      size_ = t + 1;
    } else {
      size_ = t + 1;
      need_full = true;
    }
    ++appends_since_refactor_;
    if (need_full || appends_since_refactor_ >= refactor_interval_) {
      try {
        refactorize();
      } catch (...) {
        size_ = t;
        throw;
      }
    }
    const Scalar d = factor_(t, t);
    log_det_ += std::max(Scalar(0), std::log(d * d / rho_));
  }

  /// Rebuilds the factor from the stored (K_t + rho I). Throws
  /// std::runtime_error if the matrix is not numerically positive definite.
  void refactorize() {
    appends_since_refactor_ = 0;
    if (size_ == 0) return;
    Eigen::LLT<Matrix> llt(matrix_.topLeftCorner(size_, size_));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("GramState: regularized Gram matrix is not positive definite");
    }
    factor_.topLeftCorner(size_, size_) = llt.matrixL();
    ++refactorizations_;
  }

  /// sigma^2 = k_self - k^T (K_t + rho I)^{-1} k, clamped at zero.
  template <typename Derived>
  Scalar posterior_variance(const Eigen::MatrixBase<Derived>& k_vec, Scalar k_self) const {
    if (k_vec.size() != size_) {
      throw std::invalid_argument("posterior_sigma: kernel vector length must equal history size");
    }
    Scalar var = k_self;
    if (size_ > 0) {
      Vector w = k_vec;
      lower().solveInPlace(w);
      var -= w.squaredNorm();
    }
    if (var < Scalar(0)) {
      ++negative_variance_clamps_;
      var = Scalar(0);
    }
    return var;
  }

  template <typename Derived>
  Scalar posterior_sigma(const Eigen::MatrixBase<Derived>& k_vec, Scalar k_self) const {
    return std::sqrt(posterior_variance(k_vec, k_self));
  }

  /// log det(I + K_t / rho).
  Scalar log_det() const { return log_det_; }
  /// gamma_t = 1/2 log det(I + K_t / rho) on the realized trajectory.
  Scalar info_gain() const { return Scalar(0.5) * log_det_; }

  auto lower() const {
    return factor_.topLeftCorner(size_, size_).template triangularView<Eigen::Lower>();
  }
  /// The stored K_t + rho I.
  auto regularized_gram() const { return matrix_.topLeftCorner(size_, size_); }
  Matrix factor() const { return lower(); }

  std::size_t refactorizations() const { return refactorizations_; }
  std::size_t negative_variance_clamps() const { return negative_variance_clamps_; }

 private:
  void reserve(Index n) {
    if (n <= matrix_.rows()) return;
    const Index cap = std::max<Index>(n, std::max<Index>(16, 2 * matrix_.rows()));
    Matrix grown_matrix = Matrix::Zero(cap, cap);
    Matrix grown_factor = Matrix::Zero(cap, cap);
    grown_matrix.topLeftCorner(size_, size_) = matrix_.topLeftCorner(size_, size_);
    grown_factor.topLeftCorner(size_, size_) = factor_.topLeftCorner(size_, size_);
    matrix_.swap(grown_matrix);
    factor_.swap(grown_factor);
  }

  Scalar rho_;
  Index refactor_interval_;
  Index size_ = 0;
  Index appends_since_refactor_ = 0;
  Matrix matrix_;
  Matrix factor_;
  Scalar log_det_ = Scalar(0);
  std::size_t refactorizations_ = 0;
  // Incremented from const queries; GramState is single-writer.
  mutable std::size_t negative_variance_clamps_ = 0;
};

/// Posterior widths over every grid action (direct mode) or every grid
/// pair (dueling mode), kept in step with a GramState.
///
/// With A the t x n matrix of record kernel rows against the grid and
/// W = L^{-1} A, the reduction term of sigma^2 is a quadratic form in
/// S = W^T W. Each append adds one row to W (O(t n)) and a rank-1 term to S
/// (O(n^2)); after a refactorization both are rebuilt.
template <typename Scalar_>
class GridPosterior {
 public:
  using Scalar = Scalar_;
  using Index = Eigen::Index;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridPosterior(const GridKernel<Scalar>& grid, FeedbackMode mode, Scalar rho,
                Index refactor_interval = GramState<Scalar>::kDefaultRefactorInterval)
      : grid_(&grid),
        mode_(mode),
        gram_(rho, refactor_interval),
        reduction_(Matrix::Zero(grid.size(), grid.size())) {}

  FeedbackMode mode() const { return mode_; }
  Index size() const { return gram_.size(); }
  const GramState<Scalar>& gram() const { return gram_; }
  Scalar info_gain() const { return gram_.info_gain(); }

  /// Row of the record (first, second) against the grid.
  Vector feature_row(Index first, Index second) const {
    const Matrix& kg = grid_->gram();
    if (mode_ == FeedbackMode::kDirect) return kg.col(first);
    return kg.col(first) - kg.col(second);
  }

  /// Kernel value of a record with itself.
  Scalar self_kernel(Index first, Index second) const {
    if (mode_ == FeedbackMode::kDirect) return grid_->base(first, first);
    return grid_->dueling_self(first, second);
  }

  /// Kernel vector of (first, second) against the recorded history.
  Vector history_row(Index first, Index second) const {
    const Index t = size();
    Vector k(t);
    for (Index r = 0; r < t; ++r) {
      k(r) = features_(r, first);
      if (mode_ == FeedbackMode::kDueling) k(r) -= features_(r, second);
    }
    return k;
  }

  void append(Index first, Index second) {
    const Index n = grid_->size();
    if (first < 0 || first >= n || second < 0 || second >= n) {
      throw std::out_of_range("GridPosterior::append: index outside grid");
    }
    if (mode_ == FeedbackMode::kDirect) second = first;
    const Index t = size();
    const Vector k = history_row(first, second);
    const std::size_t refactors_before = gram_.refactorizations();
    gram_.append(k, self_kernel(first, second) + gram_.rho());

    reserve(t + 1, t);
    features_.row(t) = feature_row(first, second).transpose();
    if (gram_.refactorizations() != refactors_before) {
      rebuild();
      return;
    }
    const auto factor = gram_.lower();
    Vector w = features_.row(t).transpose();
    if (t > 0) {
      w.noalias() -= whitened_.topRows(t).transpose() *
                     factor.nestedExpression().row(t).head(t).transpose();
    }
    w /= factor.nestedExpression()(t, t);
    whitened_.row(t) = w.transpose();
    reduction_.noalias() += w * w.transpose();
  }

  /// sigma_t(x) for every grid action (direct mode).
  Vector sigma() const {
    const Index n = grid_->size();
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
      out(i) = clamp_sqrt(grid_->base(i, i) - reduction_(i, i));
    }
    return out;
  }

  /// sigma^D_t(i, j) for every ordered grid pair (dueling mode). Symmetric
  /// with an exactly zero diagonal.
  Matrix sigma_pairs() const {
    const Index n = grid_->size();
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j) {
      out(j, j) = Scalar(0);
      for (Index i = j + 1; i < n; ++i) {
        const Scalar reduce = reduction_(i, i) + reduction_(j, j) - Scalar(2) * reduction_(i, j);
        const Scalar v = clamp_sqrt(grid_->dueling_self(i, j) - reduce);
        out(i, j) = v;
        out(j, i) = v;
      }
    }
    return out;
  }

  std::size_t negative_variance_clamps() const {
    return clamps_ + gram_.negative_variance_clamps();
  }

 private:
  Scalar clamp_sqrt(Scalar v) const {
    if (v < Scalar(0)) {
      ++clamps_;
      return Scalar(0);
    }
    return std::sqrt(v);
  }

  void reserve(Index rows, Index used) {
    if (rows <= features_.rows()) return;
    const Index cap = std::max<Index>(rows, std::max<Index>(16, 2 * features_.rows()));
    const Index n = grid_->size();
    Matrix f = Matrix::Zero(cap, n);
    Matrix w = Matrix::Zero(cap, n);
    if (used > 0) {
      f.topRows(used) = features_.topRows(used);
      w.topRows(used) = whitened_.topRows(used);
    }
    features_.swap(f);
    whitened_.swap(w);
  }

  void rebuild() {
    const Index t = size();
    whitened_.topRows(t) = features_.topRows(t);
    gram_.lower().solveInPlace(whitened_.topRows(t));
    reduction_.noalias() = whitened_.topRows(t).transpose() * whitened_.topRows(t);
  }

  const GridKernel<Scalar>* grid_;
  FeedbackMode mode_;
  GramState<Scalar> gram_;
  Matrix features_;   // A: kernel rows of records against the grid
  Matrix whitened_;   // W = L^{-1} A
  Matrix reduction_;  // S = W^T W
  mutable std::size_t clamps_ = 0;
};

}  // namespace prefopt

#endif  // PREFOPT_GRAM_HPP_
