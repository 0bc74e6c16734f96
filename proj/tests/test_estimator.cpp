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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "prefopt/estimator.hpp"
#include "prefopt/sigmoid.hpp"

using prefopt::FeedbackMode;
using prefopt::GridKernel;
using prefopt::History;
using prefopt::KernelFamily;
using prefopt::KernelSpec;

namespace {

Eigen::MatrixXd random_points(std::mt19937_64& gen, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd p(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) << u(gen), u(gen);
  return p;
}

History random_history(std::mt19937_64& gen, FeedbackMode mode, Eigen::Index n, Eigen::Index t) {
  History hist(mode, n);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index r = 0; r < t; ++r) hist.append(pick(gen), pick(gen), coin(gen) ? 1 : 0);
  return hist;
}

Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(gen);
  return v;
}

const KernelSpec kSpec{KernelFamily::kRbf, 1.0, 0.4};

GridKernel<double> single_point_grid() {
  return GridKernel<double>(KernelSpec{KernelFamily::kRbf, 1.0, 1.0}, Eigen::MatrixXd::Zero(1, 2));
}

}  // namespace

TEST_CASE("sigmoid identities") {
  for (double a : {-800.0, -30.0, -2.5, -1e-3, 0.0, 1e-3, 1.0, 7.0, 40.0, 800.0}) {
    CHECK(prefopt::sigmoid(a) + prefopt::sigmoid(-a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(prefopt::sigmoid_derivative(a) ==
          doctest::Approx(prefopt::sigmoid(a) * (1.0 - prefopt::sigmoid(a))));
    CHECK(prefopt::sigmoid_derivative(a) <= 0.25);
    CHECK(std::isfinite(prefopt::softplus(a)));
    CHECK(prefopt::log_sigmoid(a) <= 0.0);
  }
  CHECK(prefopt::sigmoid_derivative(0.0) == 0.25);
  CHECK(prefopt::softplus(800.0) == doctest::Approx(800.0));
}

TEST_CASE("loss at zero coefficients is t log 2") {
  std::mt19937_64 gen(1);
  const GridKernel<double> grid(kSpec, random_points(gen, 8));
  for (auto mode : {FeedbackMode::kDirect, FeedbackMode::kDueling}) {
    const History hist = random_history(gen, mode, 8, 6);
    CHECK(prefopt::loss<double>(Eigen::VectorXd::Zero(6), hist, grid, 0.3) ==
          doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("single direct row loss") {
  const GridKernel<double> grid = single_point_grid();
  History hist(FeedbackMode::kDirect, 1);
  hist.append(0, 0, 1);
  CHECK(prefopt::loss<double>(Eigen::VectorXd::Ones(1), hist, grid, 1.0) ==
        doctest::Approx(0.8132616875182228).epsilon(1e-14));
}

TEST_CASE("dueling loss is invariant to swapping a record and flipping its outcome") {
  std::mt19937_64 gen(2);
  const GridKernel<double> grid(kSpec, random_points(gen, 10));
  for (int trial = 0; trial < 20; ++trial) {
    const History hist = random_history(gen, FeedbackMode::kDueling, 10, 7);
    History swapped(FeedbackMode::kDueling, 10);
    for (const auto& r : hist.records()) swapped.append(r.second, r.first, 1 - r.outcome);
    // Swapping flips the sign of every selector, so alpha flips sign too.
    const Eigen::VectorXd alpha = random_vector(gen, 7, 1.0);
    CHECK(prefopt::loss<double>(alpha, hist, grid, 0.5) ==
          doctest::Approx(prefopt::loss<double>(Eigen::VectorXd(-alpha), swapped, grid, 0.5))
              .epsilon(1e-13));
  }
}

TEST_CASE("gradient at zero") {
  std::mt19937_64 gen(3);
  const GridKernel<double> grid(kSpec, random_points(gen, 10));
  History hist(FeedbackMode::kDueling, 10);
  hist.append(2, 7, 1);
  const Eigen::VectorXd g = prefopt::loss_gradient<double>(Eigen::VectorXd::Zero(1), hist, grid, 1.0);
  CHECK(g(0) == doctest::Approx(-0.5 * grid.dueling_self(2, 7)).epsilon(1e-15));

  History symmetric(FeedbackMode::kDueling, 10);
  symmetric.append(2, 7, 1);
  symmetric.append(2, 7, 0);
  const Eigen::VectorXd gs =
      prefopt::loss_gradient<double>(Eigen::VectorXd::Zero(2), symmetric, grid, 1.0);
  CHECK(gs.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 gen(4);
  const GridKernel<double> grid(kSpec, random_points(gen, 12));
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const auto mode = trial % 2 ? FeedbackMode::kDueling : FeedbackMode::kDirect;
    const Eigen::Index t = 1 + trial % 20;
    const History hist = random_history(gen, mode, 12, t);
    const Eigen::VectorXd alpha = random_vector(gen, t, 0.5);
    const double lambda = 0.1 + 0.05 * trial;
    const Eigen::VectorXd g = prefopt::loss_gradient<double>(alpha, hist, grid, lambda);
    Eigen::VectorXd fd(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      Eigen::VectorXd up = alpha, down = alpha;
      up(i) += h;
      down(i) -= h;
      fd(i) = (prefopt::loss<double>(up, hist, grid, lambda) -
               prefopt::loss<double>(down, hist, grid, lambda)) /
              (2.0 * h);
    }
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("loss is convex along random segments") {
  std::mt19937_64 gen(5);
  const GridKernel<double> grid(kSpec, random_points(gen, 9));
  for (int trial = 0; trial < 30; ++trial) {
    const History hist = random_history(gen, FeedbackMode::kDueling, 9, 10);
    const Eigen::VectorXd a = random_vector(gen, 10, 2.0), b = random_vector(gen, 10, 2.0);
    const double la = prefopt::loss<double>(a, hist, grid, 0.2);
    const double lb = prefopt::loss<double>(b, hist, grid, 0.2);
    for (double theta : {0.25, 0.5, 0.75}) {
      const Eigen::VectorXd mid = theta * a + (1.0 - theta) * b;
      CHECK(prefopt::loss<double>(mid, hist, grid, 0.2) <= theta * la + (1.0 - theta) * lb + 1e-10);
    }
  }
}

TEST_CASE("fit: empty history") {
  std::mt19937_64 gen(6);
  const GridKernel<double> grid(kSpec, random_points(gen, 5));
  const History hist(FeedbackMode::kDueling, 5);
  const auto fitted = prefopt::fit<double>(hist, grid, 1.0);
  CHECK(fitted.alpha.size() == 0);
  CHECK(fitted.converged);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(prefopt::predict(fitted, hist, grid, i, j) == 0.0);
      CHECK(prefopt::predict_prob(fitted, hist, grid, i, j) == 0.5);
    }
  }
}

TEST_CASE("fit: one direct observation solves s(a) - 1 + a = 0") {
  const GridKernel<double> grid = single_point_grid();
  History hist(FeedbackMode::kDirect, 1);
  hist.append(0, 0, 1);
  const auto fitted = prefopt::fit<double>(hist, grid, 1.0);
  CHECK(fitted.converged);
  CHECK(fitted.alpha(0) == doctest::Approx(0.40105813754154696).epsilon(1e-9));
  CHECK(fitted.grad_norm <= 1e-8);
}

TEST_CASE("fit: contradictory observations give a zero estimate") {
  std::mt19937_64 gen(7);
  const GridKernel<double> grid(kSpec, random_points(gen, 6));
  for (auto mode : {FeedbackMode::kDirect, FeedbackMode::kDueling}) {
    History hist(mode, 6);
    hist.append(1, 4, 1);
    hist.append(1, 4, 0);
    hist.append(3, 0, 0);
    hist.append(3, 0, 1);
    const auto fitted = prefopt::fit<double>(hist, grid, 0.1);
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) {
        CHECK(std::abs(prefopt::predict(fitted, hist, grid, i, j)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("fit reaches the gradient tolerance on both solver paths") {
  std::mt19937_64 gen(8);
  const GridKernel<double> grid(kSpec, random_points(gen, 10));
  for (int trial = 0; trial < 40; ++trial) {
    const auto mode = trial % 2 ? FeedbackMode::kDueling : FeedbackMode::kDirect;
    // t <= n takes the dense solve, t > n the grid-space one.
    const Eigen::Index t = trial < 20 ? 1 + trial % 10 : 11 + 7 * (trial % 10);
    const History hist = random_history(gen, mode, 10, t);
    const auto fitted = prefopt::fit<double>(hist, grid, 0.05 + 0.02 * (trial % 5));
    CHECK(fitted.converged);
    CHECK(fitted.grad_norm <= 1e-8);
    CHECK(prefopt::loss_gradient<double>(fitted.alpha, hist, grid, fitted.lambda).norm() <= 1e-8);
  }
}

TEST_CASE("Newton iterates strictly decrease the loss") {
  std::mt19937_64 gen(9);
  const GridKernel<double> grid(kSpec, random_points(gen, 10));
  const History hist = random_history(gen, FeedbackMode::kDueling, 10, 25);
  double previous = prefopt::loss<double>(Eigen::VectorXd::Zero(25), hist, grid, 0.1);
  for (int k = 1; k <= 6; ++k) {
    prefopt::FitOptions<double> opts;
    opts.max_iterations = k;
    const auto fitted = prefopt::fit<double>(hist, grid, 0.1, std::nullopt, opts);
    const double now = prefopt::loss<double>(fitted.alpha, hist, grid, 0.1);
    if (fitted.converged && fitted.iterations < k) break;
    // Once the gradient is tiny the decrease is below double resolution.
    if (fitted.grad_norm > 1e-6) {
      CHECK(now < previous);
    } else {
      CHECK(now <= previous + 1e-13 * previous);
    }
    previous = now;
  }
}

TEST_CASE("warm start reaches the cold-start minimizer") {
  std::mt19937_64 gen(10);
  const GridKernel<double> grid(kSpec, random_points(gen, 10));
  for (int trial = 0; trial < 20; ++trial) {
    const auto mode = trial % 2 ? FeedbackMode::kDueling : FeedbackMode::kDirect;
    const Eigen::Index t = 3 + trial;
    const History hist = random_history(gen, mode, 10, t);
    const auto cold = prefopt::fit<double>(hist, grid, 0.2);
    const Eigen::VectorXd warm_start = random_vector(gen, t - 1, 1.0);
    const auto warm = prefopt::fit<double>(hist, grid, 0.2, warm_start);
    CHECK((cold.alpha - warm.alpha).cwiseAbs().maxCoeff() <= 1e-7);
  }
  const History hist = random_history(gen, FeedbackMode::kDirect, 10, 3);
  CHECK_THROWS_AS(prefopt::fit<double>(hist, grid, 0.2, Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);
}

TEST_CASE("dueling predictions are antisymmetric and match the probability map") {
  std::mt19937_64 gen(11);
  const GridKernel<double> grid(kSpec, random_points(gen, 8));
  const History hist = random_history(gen, FeedbackMode::kDueling, 8, 15);
  const auto fitted = prefopt::fit<double>(hist, grid, 0.1);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(prefopt::predict(fitted, hist, grid, i, i) == 0.0);
    CHECK(prefopt::predict_prob(fitted, hist, grid, i, i) == 0.5);
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double h = prefopt::predict(fitted, hist, grid, i, j);
      CHECK(h == -prefopt::predict(fitted, hist, grid, j, i));
      CHECK(prefopt::predict_prob(fitted, hist, grid, i, j) == prefopt::sigmoid(h));
    }
  }
}

TEST_CASE("dueling fit matches an explicit difference-feature refit") {
  // Oracle: eigendecompose the grid Gram matrix, keep eigenvalues above a
  // floor, build phi(x) = V_x diag(sqrt(lambda)), and minimize the same
  // coefficient loss with K_t = Psi Psi^T formed from difference features,
  // using a plain dense Newton iteration.
  std::mt19937_64 gen(12);
  const Eigen::Index n = 7;
  const GridKernel<double> grid(kSpec, random_points(gen, n));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(grid.gram());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.eigenvalues()(k) > 1e-12) keep.push_back(k);
  }
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    phi.col(static_cast<Eigen::Index>(c)) =
        eig.eigenvectors().col(keep[c]) * std::sqrt(eig.eigenvalues()(keep[c]));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const History hist = random_history(gen, FeedbackMode::kDueling, n, 5);
    const double lambda = 0.3;
    const auto fitted = prefopt::fit<double>(hist, grid, lambda);

    Eigen::MatrixXd psi(5, phi.cols());
    for (Eigen::Index r = 0; r < 5; ++r) psi.row(r) = phi.row(hist[r].first) - phi.row(hist[r].second);
    const Eigen::MatrixXd k = psi * psi.transpose();
    const Eigen::VectorXd y = hist.outcomes<double>();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(5);
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd z = k * a;
      Eigen::VectorXd p(5), w(5);
      for (int r = 0; r < 5; ++r) {
        p(r) = 1.0 / (1.0 + std::exp(-z(r)));
        w(r) = p(r) * (1.0 - p(r));
      }
      const Eigen::VectorXd grad = k * (p - y) + lambda * a;
      const Eigen::MatrixXd hess =
          k * w.asDiagonal() * k + lambda * Eigen::MatrixXd::Identity(5, 5);
      a -= hess.ldlt().solve(grad);
    }
    const Eigen::VectorXd theta = psi.transpose() * a;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double oracle = (phi.row(i) - phi.row(j)).dot(theta);
        worst = std::max(worst, std::abs(oracle - prefopt::predict(fitted, hist, grid, i, j)));
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("rkhs norm") {
  const GridKernel<double> grid = single_point_grid();
  History hist(FeedbackMode::kDirect, 1);
  hist.append(0, 0, 1);
  prefopt::EstimatorFit<double> f;
  f.alpha = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(prefopt::rkhs_norm(f, hist, grid) == doctest::Approx(2.0));
}

TEST_CASE("invalid inputs") {
  const GridKernel<double> grid = single_point_grid();
  History hist(FeedbackMode::kDirect, 1);
  hist.append(0, 0, 1);
  CHECK_THROWS_AS(prefopt::fit<double>(hist, grid, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prefopt::fit<double>(hist, grid, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(prefopt::loss<double>(Eigen::VectorXd::Zero(2), hist, grid, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(hist.append(1, 0, 1), std::out_of_range);
  CHECK_THROWS_AS(hist.append(0, 0, 2), std::invalid_argument);
}

TEST_CASE("single precision instantiation") {
  std::mt19937_64 gen(13);
  const Eigen::MatrixXf p = random_points(gen, 6).cast<float>();
  const GridKernel<float> grid(kSpec, p);
  const History hist = random_history(gen, FeedbackMode::kDueling, 6, 9);
  prefopt::FitOptions<float> opts;
  opts.tolerance = 1e-4f;
  const auto fitted = prefopt::fit<float>(hist, grid, 0.5f, std::nullopt, opts);
  CHECK(fitted.converged);
  CHECK(fitted.grad_norm <= 1e-4f);
}
