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

#ifndef PREFOPT_CONFIDENCE_HPP_
#define PREFOPT_CONFIDENCE_HPP_

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace prefopt {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// How beta_t is produced: the anytime-valid schedule driven by gamma_t, or
/// a fixed constant.
struct BetaMode {
  enum class Kind { kTheoretical, kFixed };
  Kind kind = Kind::kFixed;
  double value = 1.0;

  static BetaMode theoretical() { return {Kind::kTheoretical, 0.0}; }
  static BetaMode fixed(double v) { return {Kind::kFixed, v}; }

  bool operator==(const BetaMode&) const = default;
};

/// "theoretical" or "fixed:<value>".
std::string to_string(const BetaMode& mode);
BetaMode parse_beta_mode(std::string_view text);

/// Smallest lambda used anywhere a width or beta is computed; lambda = 0 is
/// accepted on input and mapped here.
inline constexpr double kMinLambda = 1e-6;

struct ConfidenceConfig {
  double bound = 1.0;   // B
  double lambda = 1.0;  // before clamping
  double delta = 0.1;
  BetaMode beta_mode = BetaMode::fixed(1.0);

  void validate() const;
  double effective_lambda() const;
  double kappa() const;
  double lipschitz() const;
  /// lambda * kappa, the ridge added to the Gram matrix for widths.
  double rho() const;

  bool operator==(const ConfidenceConfig&) const = default;
};

/// 1 / (s(B)(1 - s(B))); equals 4 at B = 0.
double kappa(double bound);
/// Largest slope of the sigmoid, 1/4, attained at 0.
double lipschitz_L(double bound);

/// 4 L B + 2 L sqrt((2 kappa / lambda)(gamma_t + log(1/delta))) in
/// theoretical mode, the configured constant otherwise.
double beta(const ConfidenceConfig& config, double gamma_t);

inline double lcb(double prob, double beta_t, double sigma) { return prob - beta_t * sigma; }
inline double ucb(double prob, double beta_t, double sigma) { return prob + beta_t * sigma; }

/// s(g_i - g_j) for every ordered pair; the diagonal is exactly 0.5.
Eigen::MatrixXd pair_probabilities(const Eigen::VectorXd& utility);

/// M_t: i is kept iff min_j ucb(i, j) >= 0.5. An empty result falls back to
/// all-true and sets `*fell_back`.
Mask plausible_maximizers(const Eigen::MatrixXd& prob, const Eigen::MatrixXd& sigma,
                          double beta_t, bool* fell_back = nullptr);

/// Per-step confidence snapshot consumed by the policies.
struct ConfidenceState {
  double beta = 1.0;
  Eigen::MatrixXd sigma;  // n x 1 (direct) or n x n (dueling)
  Mask maximizer_mask;
};

}  // namespace prefopt

#endif  // PREFOPT_CONFIDENCE_HPP_
