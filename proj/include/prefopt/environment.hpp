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

#ifndef PREFOPT_ENVIRONMENT_HPP_
#define PREFOPT_ENVIRONMENT_HPP_

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "prefopt/history.hpp"
#include "prefopt/rng.hpp"

namespace prefopt {

enum class TestFunction { kAckley, kBranin, kEggholder, kHoelder, kMatyas, kMichalewicz, kRosenbrock };

const std::array<TestFunction, 7>& all_test_functions();
/// Lowercase CLI name: ackley, branin, eggholder, hoelder, matyas,
/// michalewicz, rosenbrock.
std::string to_string(TestFunction fn);
TestFunction parse_test_function(std::string_view name);

struct Box {
  Eigen::Vector2d lower;
  Eigen::Vector2d upper;
};

Box domain(TestFunction fn);

/// The test function in its usual minimization form.
double raw_value(TestFunction fn, const Eigen::Vector2d& x);

/// A finite action set with a known utility per action.
struct Environment {
  std::string name;
  Eigen::MatrixXd points;       // n x d, native coordinates
  Eigen::MatrixXd unit_points;  // n x d, bounding box mapped to [0, 1]^d; kernel inputs
  Eigen::VectorXd utilities;    // scaled to [-3, 3]
  Eigen::Index optimum_idx = 0;
  Eigen::Index minimum_idx = 0;

  Eigen::Index size() const { return utilities.size(); }
};

/// Evaluates `fn` on a `mesh` x `mesh` axis-aligned grid spanning its domain
/// (endpoints included), negates it into a utility, and rescales affinely so
/// the grid utilities span exactly [-3, 3].
Environment build_environment(TestFunction fn, Eigen::Index mesh = 10);

/// Custom action set from native coordinates and utilities (larger is
/// better). With `rescale`, utilities are mapped affinely onto [-3, 3]; a
/// constant utility vector maps to all zeros.
Environment make_environment(std::string name, Eigen::MatrixXd points, Eigen::VectorXd utilities,
                             bool rescale = true);

/// [s(f* - f_i) + s(f* - f_j) - 1] / 2.
double dueling_regret_step(const Environment& env, Eigen::Index i, Eigen::Index j);
/// s(f*) - s(f_i).
double logistic_regret_step(const Environment& env, Eigen::Index i);

/// Bernoulli feedback: P(y = 1) = s(f_i - f_j) for dueling queries and
/// s(f_i) for direct ones (j ignored).
class FeedbackSampler {
 public:
  FeedbackSampler(FeedbackMode mode, CounterRng rng) : mode_(mode), rng_(rng) {}

  double probability(const Environment& env, Eigen::Index i, Eigen::Index j) const;
  int sample(const Environment& env, Eigen::Index i, Eigen::Index j);

  FeedbackMode mode() const { return mode_; }

 private:
  FeedbackMode mode_;
  CounterRng rng_;
};

}  // namespace prefopt

#endif  // PREFOPT_ENVIRONMENT_HPP_
