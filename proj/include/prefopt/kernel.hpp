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

#ifndef PREFOPT_KERNEL_HPP_
#define PREFOPT_KERNEL_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace prefopt {

enum class KernelFamily { kRbf, kMatern12, kMatern32, kMatern52, kLinear };

/// Base kernel family plus hyperparameters. Immutable once validated; the
/// same spec induces both the base kernel and the dueling kernel on pairs.
struct KernelSpec {
  KernelFamily family = KernelFamily::kRbf;
  double variance = 1.0;
  double lengthscale = 1.0;

  /// Throws std::invalid_argument unless variance and lengthscale are
  /// finite and strictly positive.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

std::string to_string(KernelFamily family);
/// Accepts rbf, matern12, matern32, matern52, linear (case-sensitive).
KernelFamily parse_kernel_family(std::string_view name);

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x) {
  if (!x.allFinite()) {
    throw std::domain_error("kernel input contains non-finite values");
  }
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar eval_kernel(const KernelSpec& spec,
                                      const Eigen::MatrixBase<DerivedA>& x,
                                      const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  using std::exp;
  using std::sqrt;
  detail::require_finite(x);
  detail::require_finite(y);
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel inputs differ in dimension");
  }
  const Scalar variance(spec.variance);
  const Scalar ell(spec.lengthscale);
  if (spec.family == KernelFamily::kLinear) {
    return variance * x.dot(y) / (ell * ell);
  }
  const Scalar r2 = (x - y).squaredNorm() / (ell * ell);
  switch (spec.family) {
    case KernelFamily::kRbf:
      return variance * exp(Scalar(-0.5) * r2);
    case KernelFamily::kMatern12:
      return variance * exp(-sqrt(r2));
    case KernelFamily::kMatern32: {
      const Scalar a = sqrt(Scalar(3) * r2);
      return variance * (Scalar(1) + a) * exp(-a);
    }
    case KernelFamily::kMatern52: {
      const Scalar a = sqrt(Scalar(5) * r2);
      return variance * (Scalar(1) + a + a * a / Scalar(3)) * exp(-a);
    }
    case KernelFamily::kLinear:
      break;
  }
  throw std::logic_error("unhandled kernel family");
}

/// k^D((a, a'), (b, b')) = k(a, b) + k(a', b') - k(a, b') - k(a', b).
template <typename D1, typename D2, typename D3, typename D4>
typename D1::Scalar eval_dueling_kernel(const KernelSpec& spec,
                                        const Eigen::MatrixBase<D1>& a,
                                        const Eigen::MatrixBase<D2>& a_prime,
                                        const Eigen::MatrixBase<D3>& b,
                                        const Eigen::MatrixBase<D4>& b_prime) {
  return eval_kernel(spec, a, b) + eval_kernel(spec, a_prime, b_prime) -
         eval_kernel(spec, a, b_prime) - eval_kernel(spec, a_prime, b);
}

/// Gram matrix K(i, j) = k(x_i, y_j) over the rows of two point sets.
template <typename DerivedX, typename DerivedY>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic>
gram_matrix(const KernelSpec& spec, const Eigen::MatrixBase<DerivedX>& xs,
            const Eigen::MatrixBase<DerivedY>& ys) {
  using Scalar = typename DerivedX::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(xs.rows(),
                                                            ys.rows());
  for (Eigen::Index j = 0; j < ys.rows(); ++j) {
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      out(i, j) = eval_kernel(spec, xs.row(i), ys.row(j));
    }
  }
  return out;
}

/// A finite action set (one point per row) with its base-kernel Gram matrix
/// precomputed. Every history record refers to actions by row index, so all
/// kernel rows the estimator and the confidence widths need are gathered
/// from this table.
template <typename Scalar_>
class GridKernel {
 public:
  using Scalar = Scalar_;
  using Index = Eigen::Index;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridKernel(const KernelSpec& spec, Matrix points)
      : spec_(spec), points_(std::move(points)) {
    spec_.validate();
    if (points_.rows() == 0) {
      throw std::invalid_argument("grid must contain at least one point");
    }
    gram_ = gram_matrix(spec_, points_, points_);
    // Exact symmetry; the Gram loop evaluates both triangles independently.
    gram_ = Scalar(0.5) * (gram_ + gram_.transpose()).eval();
  }

  Index size() const { return points_.rows(); }
  const KernelSpec& spec() const { return spec_; }
  const Matrix& points() const { return points_; }
  const Matrix& gram() const { return gram_; }

  Scalar base(Index i, Index j) const { return gram_(i, j); }

  Scalar dueling(Index i, Index i_prime, Index j, Index j_prime) const {
    return gram_(i, j) + gram_(i_prime, j_prime) - gram_(i, j_prime) -
           gram_(i_prime, j);
  }

  /// k^D((i, j), (i, j)); zero whenever i == j.
  Scalar dueling_self(Index i, Index j) const {
    return gram_(i, i) + gram_(j, j) - Scalar(2) * gram_(i, j);
  }

 private:
  KernelSpec spec_;
  Matrix points_;
  Matrix gram_;
};

}  // namespace prefopt

#endif  // PREFOPT_KERNEL_HPP_
