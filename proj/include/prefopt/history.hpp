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

#ifndef PREFOPT_HISTORY_HPP_
#define PREFOPT_HISTORY_HPP_

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace prefopt {

/// Direct: y ~ Bern(s(f(x))), the second index is ignored (the x_null
/// device). Dueling: y ~ Bern(s(f(x) - f(x'))).
enum class FeedbackMode { kDirect, kDueling };

struct Record {
  Eigen::Index first = 0;
  Eigen::Index second = 0;
  int outcome = 0;

  bool operator==(const Record&) const = default;
};

/// Ordered observations over a fixed grid of `grid_size` actions.
///
/// Each record maps to a selector vector e_r over the grid (e_i in direct
/// mode, e_i - e_j in dueling mode), so every kernel quantity over the
/// history factors through the grid Gram matrix: K_t = E Kg E^T.
class History {
 public:
  using Index = Eigen::Index;

  History(FeedbackMode mode, Index grid_size) : mode_(mode), grid_size_(grid_size) {
    if (grid_size <= 0) throw std::invalid_argument("grid_size must be positive");
  }

  void append(Index first, Index second, int outcome) {
    if (first < 0 || first >= grid_size_) {
      throw std::out_of_range("history: first index outside grid");
    }
    if (mode_ == FeedbackMode::kDueling && (second < 0 || second >= grid_size_)) {
      throw std::out_of_range("history: second index outside grid");
    }
    if (outcome != 0 && outcome != 1) {
      throw std::invalid_argument("history: outcome must be 0 or 1");
    }
    records_.push_back({first, mode_ == FeedbackMode::kDirect ? first : second, outcome});
  }

  void append(const Record& r) { append(r.first, r.second, r.outcome); }

  FeedbackMode mode() const { return mode_; }
  Index grid_size() const { return grid_size_; }
  Index size() const { return static_cast<Index>(records_.size()); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }
  const Record& operator[](Index i) const { return records_[static_cast<std::size_t>(i)]; }

  /// out = E^T coeffs (length grid_size).
  template <typename DerivedIn, typename DerivedOut>
  void scatter(const Eigen::MatrixBase<DerivedIn>& coeffs,
               Eigen::MatrixBase<DerivedOut>& out) const {
    out.derived().setZero(grid_size_);
    for (Index r = 0; r < size(); ++r) {
      const Record& rec = (*this)[r];
      out(rec.first) += coeffs(r);
      if (mode_ == FeedbackMode::kDueling) out(rec.second) -= coeffs(r);
    }
  }

  /// out = E grid_values (length size()).
  template <typename DerivedIn, typename DerivedOut>
  void gather(const Eigen::MatrixBase<DerivedIn>& grid_values,
              Eigen::MatrixBase<DerivedOut>& out) const {
    out.derived().resize(size());
    for (Index r = 0; r < size(); ++r) {
      const Record& rec = (*this)[r];
      out(r) = grid_values(rec.first);
      if (mode_ == FeedbackMode::kDueling) out(r) -= grid_values(rec.second);
    }
  }

  /// Outcomes as a vector of {0, 1}.
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> outcomes() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(size());
    for (Index r = 0; r < size(); ++r) y(r) = Scalar((*this)[r].outcome);
    return y;
  }

 private:
  FeedbackMode mode_;
  Index grid_size_;
  std::vector<Record> records_;
};

}  // namespace prefopt

#endif  // PREFOPT_HISTORY_HPP_
