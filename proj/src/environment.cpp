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

#include "prefopt/environment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "prefopt/sigmoid.hpp"

namespace prefopt {

namespace {

constexpr double kPi = std::numbers::pi;

double ackley(const Eigen::Vector2d& x) {
  const double d = 2.0;
  const double sq = x.squaredNorm() / d;
  const double cs = (std::cos(2.0 * kPi * x(0)) + std::cos(2.0 * kPi * x(1))) / d;
  return -20.0 * std::exp(-0.2 * std::sqrt(sq)) - std::exp(cs) + 20.0 + std::exp(1.0);
}

double branin(const Eigen::Vector2d& x) {
  const double a = x(1) - 5.1 / (4.0 * kPi * kPi) * x(0) * x(0) + 5.0 / kPi * x(0) - 6.0;
  return a * a + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(x(0)) + 10.0;
}

double eggholder(const Eigen::Vector2d& x) {
  return -(x(1) + 47.0) * std::sin(std::sqrt(std::abs(x(1) + x(0) / 2.0 + 47.0))) -
         x(0) * std::sin(std::sqrt(std::abs(x(0) - (x(1) + 47.0))));
}

double hoelder(const Eigen::Vector2d& x) {
  return -std::abs(std::sin(x(0)) * std::cos(x(1)) *
                   std::exp(std::abs(1.0 - x.norm() / kPi)));
}

double matyas(const Eigen::Vector2d& x) {
  return 0.26 * x.squaredNorm() - 0.48 * x(0) * x(1);
}

double michalewicz(const Eigen::Vector2d& x) {
  constexpr int m = 10;
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double inner = std::sin((i + 1) * x(i) * x(i) / kPi);
    total -= std::sin(x(i)) * std::pow(inner, 2 * m);
  }
  return total;
}

double rosenbrock(const Eigen::Vector2d& x) {
  const double a = x(1) - x(0) * x(0);
  const double b = x(0) - 1.0;
  return 100.0 * a * a + b * b;
}

Eigen::MatrixXd to_unit_box(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd unit = points;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double lo = points.col(c).minCoeff();
    const double hi = points.col(c).maxCoeff();
    if (hi > lo) {
      unit.col(c) = (points.col(c).array() - lo) / (hi - lo);
    } else {
      unit.col(c).setZero();
    }
  }
  return unit;
}

// Index of the first extremal entry.
Eigen::Index first_argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

Eigen::Index first_argmin(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) < v(best)) best = i;
  }
  return best;
}

}  // namespace

const std::array<TestFunction, 7>& all_test_functions() {
  static const std::array<TestFunction, 7> fns = {
      TestFunction::kAckley, TestFunction::kBranin,      TestFunction::kEggholder,
      TestFunction::kHoelder, TestFunction::kMatyas, TestFunction::kMichalewicz,
      TestFunction::kRosenbrock};
  return fns;
}

std::string to_string(TestFunction fn) {
  switch (fn) {
    case TestFunction::kAckley: return "ackley";
    case TestFunction::kBranin: return "branin";
    case TestFunction::kEggholder: return "eggholder";
    case TestFunction::kHoelder: return "hoelder";
    case TestFunction::kMatyas: return "matyas";
    case TestFunction::kMichalewicz: return "michalewicz";
    case TestFunction::kRosenbrock: return "rosenbrock";
  }
  throw std::logic_error("unhandled test function");
}

TestFunction parse_test_function(std::string_view name) {
  for (TestFunction fn : all_test_functions()) {
    if (to_string(fn) == name) return fn;
  }
  throw std::invalid_argument("unknown environment: " + std::string(name));
}

Box domain(TestFunction fn) {
  switch (fn) {
    case TestFunction::kAckley: return {{-5.0, -5.0}, {5.0, 5.0}};
    case TestFunction::kBranin: return {{-5.0, 0.0}, {10.0, 15.0}};
    case TestFunction::kEggholder: return {{-512.0, -512.0}, {512.0, 512.0}};
    case TestFunction::kHoelder: return {{-10.0, -10.0}, {10.0, 10.0}};
    case TestFunction::kMatyas: return {{-10.0, -10.0}, {10.0, 10.0}};
    case TestFunction::kMichalewicz: return {{0.0, 0.0}, {kPi, kPi}};
    case TestFunction::kRosenbrock: return {{-5.0, -5.0}, {10.0, 10.0}};
  }
  throw std::logic_error("unhandled test function");
}

double raw_value(TestFunction fn, const Eigen::Vector2d& x) {
  if (!x.allFinite()) throw std::domain_error("raw_value: non-finite input");
  switch (fn) {
    case TestFunction::kAckley: return ackley(x);
    case TestFunction::kBranin: return branin(x);
    case TestFunction::kEggholder: return eggholder(x);
    case TestFunction::kHoelder: return hoelder(x);
    case TestFunction::kMatyas: return matyas(x);
    case TestFunction::kMichalewicz: return michalewicz(x);
    case TestFunction::kRosenbrock: return rosenbrock(x);
  }
  throw std::logic_error("unhandled test function");
}

Environment build_environment(TestFunction fn, Eigen::Index mesh) {
  if (mesh < 2) throw std::invalid_argument("build_environment: mesh must be at least 2");
  const Box box = domain(fn);
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(mesh, box.lower(0), box.upper(0));
  const Eigen::VectorXd ys = Eigen::VectorXd::LinSpaced(mesh, box.lower(1), box.upper(1));
  Eigen::MatrixXd points(mesh * mesh, 2);
  Eigen::VectorXd utilities(mesh * mesh);
  for (Eigen::Index a = 0; a < mesh; ++a) {
    for (Eigen::Index b = 0; b < mesh; ++b) {
      const Eigen::Index idx = a * mesh + b;
      points.row(idx) << xs(a), ys(b);
      utilities(idx) = -raw_value(fn, points.row(idx).transpose());
    }
  }
  return make_environment(to_string(fn), std::move(points), std::move(utilities), true);
}

Environment make_environment(std::string name, Eigen::MatrixXd points, Eigen::VectorXd utilities,
                             bool rescale) {
  if (points.rows() != utilities.size() || utilities.size() == 0) {
    throw std::invalid_argument("make_environment: need one utility per point, at least one");
  }
  if (!utilities.allFinite() || !points.allFinite()) {
    throw std::domain_error("make_environment: non-finite inputs");
  }
  Environment env;
  env.name = std::move(name);
  env.unit_points = to_unit_box(points);
  env.points = std::move(points);
  if (rescale) {
    const double lo = utilities.minCoeff();
    const double hi = utilities.maxCoeff();
    if (hi > lo) {
      utilities = (-3.0 + 6.0 * (utilities.array() - lo) / (hi - lo)).matrix();
    } else {
      utilities.setZero();
    }
  }
  env.utilities = std::move(utilities);
  env.optimum_idx = first_argmax(env.utilities);
  env.minimum_idx = first_argmin(env.utilities);
  return env;
}

double dueling_regret_step(const Environment& env, Eigen::Index i, Eigen::Index j) {
  const double best = env.utilities(env.optimum_idx);
  return (sigmoid(best - env.utilities(i)) + sigmoid(best - env.utilities(j)) - 1.0) / 2.0;
}

double logistic_regret_step(const Environment& env, Eigen::Index i) {
  return sigmoid(env.utilities(env.optimum_idx)) - sigmoid(env.utilities(i));
}

double FeedbackSampler::probability(const Environment& env, Eigen::Index i,
                                    Eigen::Index j) const {
  if (i < 0 || i >= env.size() || j < 0 || j >= env.size()) {
    throw std::out_of_range("feedback: index outside grid");
  }
  if (mode_ == FeedbackMode::kDirect) return sigmoid(env.utilities(i));
  return sigmoid(env.utilities(i) - env.utilities(j));
}

int FeedbackSampler::sample(const Environment& env, Eigen::Index i, Eigen::Index j) {
  return rng_.bernoulli(probability(env, i, j)) ? 1 : 0;
}

}  // namespace prefopt
