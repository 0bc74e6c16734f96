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

#include "prefopt/confidence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prefopt/sigmoid.hpp"

namespace prefopt {

std::string to_string(const BetaMode& mode) {
  if (mode.kind == BetaMode::Kind::kTheoretical) return "theoretical";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), mode.value);
  return "fixed:" + std::string(buf, res.ptr);
}

BetaMode parse_beta_mode(std::string_view text) {
  if (text == "theoretical") return BetaMode::theoretical();
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string_view number = text.substr(prefix.size());
    double value = 0.0;
    const auto res = std::from_chars(number.data(), number.data() + number.size(), value);
    if (res.ec != std::errc() || res.ptr != number.data() + number.size() || !(value >= 0.0) ||
        !std::isfinite(value)) {
      throw std::invalid_argument("invalid fixed beta value: " + std::string(number));
    }
    return BetaMode::fixed(value);
  }
  throw std::invalid_argument("beta mode must be 'theoretical' or 'fixed:<value>', got: " +
                              std::string(text));
}

void ConfidenceConfig::validate() const {
  if (!(bound >= 0.0) || !std::isfinite(bound)) {
    throw std::invalid_argument("bound B must be nonnegative and finite");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be nonnegative and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

double ConfidenceConfig::effective_lambda() const { return std::max(lambda, kMinLambda); }
double ConfidenceConfig::kappa() const { return prefopt::kappa(bound); }
double ConfidenceConfig::lipschitz() const { return lipschitz_L(bound); }
double ConfidenceConfig::rho() const { return effective_lambda() * kappa(); }

double kappa(double bound) {
  if (!(bound >= 0.0)) throw std::invalid_argument("kappa: bound must be nonnegative");
  return 1.0 / sigmoid_derivative(bound);
}

double lipschitz_L(double bound) {
  if (!(bound >= 0.0)) throw std::invalid_argument("lipschitz_L: bound must be nonnegative");
  return 0.25;
}

double beta(const ConfidenceConfig& config, double gamma_t) {
  if (config.beta_mode.kind == BetaMode::Kind::kFixed) return config.beta_mode.value;
  if (!(gamma_t >= 0.0)) throw std::invalid_argument("beta: gamma_t must be nonnegative");
  const double l = config.lipschitz();
  const double b = config.bound;
  const double scale = 2.0 * config.kappa() / config.effective_lambda();
  return 4.0 * l * b + 2.0 * l * std::sqrt(scale * (gamma_t + std::log(1.0 / config.delta)));
}

Eigen::MatrixXd pair_probabilities(const Eigen::VectorXd& utility) {
  const Eigen::Index n = utility.size();
  Eigen::MatrixXd prob(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    prob(j, j) = 0.5;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      prob(i, j) = sigmoid(utility(i) - utility(j));
      prob(j, i) = sigmoid(utility(j) - utility(i));
    }
  }
  return prob;
}

Mask plausible_maximizers(const Eigen::MatrixXd& prob, const Eigen::MatrixXd& sigma,
                          double beta_t, bool* fell_back) {
  if (prob.rows() != prob.cols() || sigma.rows() != prob.rows() ||
      sigma.cols() != prob.cols()) {
    throw std::invalid_argument("plausible_maximizers: tables must be square and equal-sized");
  }
  const Eigen::Index n = prob.rows();
  Mask mask(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool keep = true;
    for (Eigen::Index j = 0; j < n && keep; ++j) {
      keep = ucb(prob(i, j), beta_t, sigma(i, j)) >= 0.5;
    }
    mask(i) = keep;
  }
  const bool empty = n > 0 && !mask.any();
  if (empty) mask.setConstant(true);
  if (fell_back != nullptr) *fell_back = empty;
  return mask;
}

}  // namespace prefopt
