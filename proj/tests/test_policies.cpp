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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "prefopt/environment.hpp"
#include "prefopt/policies.hpp"
#include "selection_oracles.hpp"

using prefopt::Mask;
using prefopt::Pair;
using prefopt::PolicyKind;

namespace {

Mask all_true(Eigen::Index n) { return Mask::Constant(n, true); }

Eigen::MatrixXd lcb_of(const oracle::Tables& t, double beta) { return t.prob - beta * t.sigma; }
Eigen::MatrixXd ucb_of(const oracle::Tables& t, double beta) { return t.prob + beta * t.sigma; }

}  // namespace

TEST_CASE("policy names") {
  for (PolicyKind k : prefopt::all_policies()) CHECK(prefopt::parse_policy(prefopt::to_string(k)) == k);
  CHECK(prefopt::all_policies().size() == 8);
  CHECK(prefopt::feedback_mode(PolicyKind::kLgpUcb) == prefopt::FeedbackMode::kDirect);
  CHECK(prefopt::feedback_mode(PolicyKind::kIndUcb) == prefopt::FeedbackMode::kDirect);
  CHECK(prefopt::feedback_mode(PolicyKind::kIds) == prefopt::FeedbackMode::kDueling);
  CHECK_THROWS_AS(prefopt::parse_policy("ucb"), std::invalid_argument);
}

TEST_CASE("lgp-ucb") {
  CHECK(prefopt::lgp_ucb_select(Eigen::VectorXd::Constant(5, 1.5)) == 0);
  CHECK(prefopt::lgp_ucb_select((Eigen::VectorXd(3) << 0.4, 0.9, 0.9).finished()) == 1);
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Tables t = oracle::random_tables(gen, 20, trial % 2 == 0);
    const Eigen::VectorXd ucb = t.sigma.col(0);
    std::vector<Eigen::Index> all(20);
    for (Eigen::Index i = 0; i < 20; ++i) all[static_cast<std::size_t>(i)] = i;
    CHECK(prefopt::lgp_ucb_select(ucb) == oracle::first_argmax(all, [&](Eigen::Index i) { return ucb(i); }));
  }
}

TEST_CASE("ind-ucb") {
  const Eigen::VectorXd counts = (Eigen::VectorXd(3) << 4, 0, 0).finished();
  CHECK(prefopt::ind_ucb_select(counts, Eigen::VectorXd::Zero(3), 5) == 1);
  const Eigen::VectorXd n = (Eigen::VectorXd(2) << 100, 100).finished();
  const Eigen::VectorXd means = (Eigen::VectorXd(2) << 0.5, 0.6).finished();
  CHECK(prefopt::ind_ucb_select(n, means, 200) == 1);
  // Indices 0.8255 and 0.9255: the bonus sqrt(2 log 200 / 100) is shared.
  CHECK(0.5 + std::sqrt(2.0 * std::log(200.0) / 100.0) == doctest::Approx(0.8255).epsilon(1e-4));
  CHECK(prefopt::ind_ucb_select(Eigen::VectorXd::Constant(1, 9.0), Eigen::VectorXd::Zero(1), 10) == 0);

  prefopt::Policy policy(PolicyKind::kIndUcb, 0);
  const Eigen::VectorXd unused = Eigen::VectorXd::Zero(4);
  for (int step = 0; step < 4; ++step) {
    const Eigen::Index x = policy.select(prefopt::DirectTables{unused, unused, 1.0});
    CHECK(x == step);
    policy.observe({x, x}, 1);
  }
}

TEST_CASE("maxminlcb: hand-built tables") {
  Eigen::MatrixXd lcb(3, 3);
  lcb << 0.5, 0.2, 0.4, 0.6, 0.5, 0.45, 0.3, 0.1, 0.5;
  double objective = 0.0;
  CHECK(prefopt::maxminlcb_select(lcb, all_true(3), &objective) == Pair{1, 2});
  CHECK(objective == 0.45);

  Mask single = Mask::Constant(3, false);
  single(2) = true;
  const Eigen::MatrixXd flat = prefopt::pair_probabilities(Eigen::VectorXd::Zero(3));
  CHECK(prefopt::maxminlcb_select(flat, single, &objective) == Pair{2, 2});
  CHECK(objective == 0.5);
}

TEST_CASE("maxminlcb picks the low-regret pair where optimism and information do not") {
  // Three arms; arm 1 is best, arm 2 a close second and arm 0 poor but
  // uncertain against arm 2.
  const Eigen::VectorXd g = (Eigen::VectorXd(3) << 0.0, 1.0, 0.8).finished();
  Eigen::MatrixXd sigma(3, 3);
  sigma << 0.0, 0.1, 0.4, 0.1, 0.0, 0.1, 0.4, 0.1, 0.0;
  const Eigen::MatrixXd prob = prefopt::pair_probabilities(g);
  const double beta = 1.0;
  const Pair game = prefopt::maxminlcb_select(prob - beta * sigma, all_true(3));
  CHECK(game == Pair{1, 2});
  const Pair info = prefopt::maxinp_select(sigma, all_true(3));
  CHECK(info == Pair{0, 2});
  const Eigen::MatrixXd ucb = prob + beta * sigma;
  Eigen::Index oi = 0, oj = 0;
  ucb.maxCoeff(&oi, &oj);
  const Pair optimism{oi, oj};
  CHECK(optimism == Pair{2, 0});
  const prefopt::Environment env =
      prefopt::make_environment("three", Eigen::MatrixXd::Identity(3, 3), g, false);
  const double r_game = prefopt::dueling_regret_step(env, game.first, game.second);
  CHECK(r_game < prefopt::dueling_regret_step(env, info.first, info.second));
  CHECK(r_game < prefopt::dueling_regret_step(env, optimism.first, optimism.second));
}

TEST_CASE("maxminlcb matches enumeration and never exceeds one half") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const oracle::Tables t = oracle::random_tables(gen, n, trial % 3 == 0);
    const Mask mask = oracle::random_mask(gen, n);
    const Eigen::MatrixXd lcb = lcb_of(t, 1.0 + (trial % 4));
    double objective = 0.0;
    const Pair p = prefopt::maxminlcb_select(lcb, mask, &objective);
    CHECK(p == oracle::maxminlcb(lcb, mask));
    CHECK(mask(p.first));
    CHECK(mask(p.second));
    CHECK(objective <= 0.5 + 1e-12);
  }
}

TEST_CASE("maxinp") {
  const Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(4, 4, 0.3) - 0.3 * Eigen::MatrixXd::Identity(4, 4);
  CHECK(prefopt::maxinp_select(sigma, all_true(4)) == Pair{0, 1});
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const oracle::Tables t = oracle::random_tables(gen, n, trial % 2 == 0);
    const Mask mask = oracle::random_mask(gen, n);
    const Pair p = prefopt::maxinp_select(t.sigma, mask);
    CHECK(p == oracle::maxinp(t.sigma, mask));
    double masked_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (mask(i) && mask(j)) masked_max = std::max(masked_max, t.sigma(i, j));
      }
    }
    if (masked_max > 0.0) CHECK(p.first != p.second);
  }
}

TEST_CASE("rucb") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const oracle::Tables t = oracle::random_tables(gen, n, trial % 2 == 0);
    const Mask mask = oracle::random_mask(gen, n);
    const Eigen::MatrixXd ucb = ucb_of(t, 1.0);
    prefopt::CounterRng rng(static_cast<std::uint64_t>(trial), 1);
    prefopt::CounterRng replay = rng;
    const Pair p = prefopt::rucb_select(ucb, mask, rng);
    const auto m = oracle::members(mask);
    const Eigen::Index ref = m[static_cast<std::size_t>(replay.uniform_index(static_cast<std::int64_t>(m.size())))];
    CHECK(p.second == ref);
    CHECK(p.first == oracle::ucb_response(ucb, mask, ref));
  }
  Mask single = Mask::Constant(5, false);
  single(3) = true;
  prefopt::CounterRng rng(0, 1);
  CHECK(prefopt::rucb_select(Eigen::MatrixXd::Zero(5, 5), single, rng) == Pair{3, 3});
}

TEST_CASE("rucb reference is uniform over the mask") {
  Mask mask = Mask::Constant(7, false);
  mask(1) = mask(2) = mask(4) = mask(6) = true;
  prefopt::CounterRng rng(123, 1);
  std::array<int, 7> counts{};
  const Eigen::MatrixXd ucb = Eigen::MatrixXd::Zero(7, 7);
  for (int k = 0; k < 10000; ++k) ++counts[static_cast<std::size_t>(prefopt::rucb_select(ucb, mask, rng).second)];
  for (int i = 0; i < 7; ++i) {
    if (mask(i)) {
      CHECK(counts[static_cast<std::size_t>(i)] / 10000.0 >= 0.22);
      CHECK(counts[static_cast<std::size_t>(i)] / 10000.0 <= 0.28);
    } else {
      CHECK(counts[static_cast<std::size_t>(i)] == 0);
    }
  }
}

TEST_CASE("multisbm carries the previous second arm") {
  std::mt19937_64 gen(5);
  prefopt::MultiSbmState state;
  Eigen::Index previous_second = -1;
  for (int step = 0; step < 100; ++step) {
    const oracle::Tables t = oracle::random_tables(gen, 5, step % 2 == 0);
    const Mask mask = oracle::random_mask(gen, 5);
    const Eigen::MatrixXd ucb = ucb_of(t, 1.0);
    const Eigen::Index carried = state.carried;
    const Pair p = prefopt::multisbm_select(ucb, mask, state);
    CHECK(p.first == (step == 0 ? 0 : previous_second));
    CHECK(p.first == carried);
    CHECK(p.second == oracle::ucb_response(ucb, mask, carried));
    previous_second = p.second;
  }
}

TEST_CASE("doubler epochs") {
  prefopt::DoublerState state;
  prefopt::CounterRng rng(7, 1);
  std::mt19937_64 gen(6);
  // Step 1: the pool is {0}.
  const oracle::Tables first = oracle::random_tables(gen, 6);
  const Eigen::MatrixXd ucb1 = ucb_of(first, 1.0);
  const Pair p1 = prefopt::doubler_select(ucb1, all_true(6), state, rng);
  CHECK(p1.second == 0);
  CHECK(p1.first == oracle::ucb_response(ucb1, all_true(6), 0));

  std::vector<std::int64_t> lengths;
  std::int64_t steps = 1;
  int epoch = state.epoch;
  std::int64_t in_epoch = 1;
  while (steps < 2 + 4 + 8 + 16 + 5) {
    std::vector<Eigen::Index> played;
    const std::vector<Eigen::Index> pool = state.pool;
    const oracle::Tables t = oracle::random_tables(gen, 6);
    const Eigen::MatrixXd ucb = ucb_of(t, 1.0);
    const Pair p = prefopt::doubler_select(ucb, all_true(6), state, rng);
    CHECK(std::find(pool.begin(), pool.end(), p.second) != pool.end());
    CHECK(p.first == oracle::ucb_response(ucb, all_true(6), p.second));
    ++steps;
    ++in_epoch;
    if (state.epoch != epoch) {
      lengths.push_back(in_epoch);
      CHECK(state.pool.size() == (std::size_t{1} << epoch));
      epoch = state.epoch;
      in_epoch = 0;
    }
  }
  CHECK(lengths == std::vector<std::int64_t>{2, 4, 8, 16});
}

TEST_CASE("doubler pool collects the epoch's maximizer arms") {
  prefopt::DoublerState state;
  prefopt::CounterRng rng(1, 1);
  // Column-independent table: arm 3 always answers.
  Eigen::MatrixXd ucb = Eigen::MatrixXd::Constant(5, 5, 0.1);
  ucb.row(3).setConstant(0.9);
  prefopt::doubler_select(ucb, all_true(5), state, rng);
  prefopt::doubler_select(ucb, all_true(5), state, rng);
  CHECK(state.epoch == 2);
  CHECK(state.pool == std::vector<Eigen::Index>{3, 3});
  CHECK(prefopt::doubler_select(ucb, all_true(5), state, rng).second == 3);
}

TEST_CASE("ids: zero estimate") {
  const Eigen::Index n = 5;
  const Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  std::mt19937_64 gen(7);
  const oracle::Tables t = oracle::random_tables(gen, n);
  const prefopt::IdsDecision d = prefopt::ids_decide(g, t.sigma, 4.0, 0.5);
  CHECK(d.incumbent == 0);
  CHECK(d.optimistic_gap == doctest::Approx(4.0 * t.sigma.col(0).maxCoeff()));
  // The gap of the incumbent itself equals u.
  CHECK(d.optimistic_gap + g(d.incumbent) - g(d.incumbent) == d.optimistic_gap);
}

TEST_CASE("ids: fully resolved widths play the incumbent twice") {
  const Eigen::VectorXd g = (Eigen::VectorXd(3) << 0.1, 0.7, 0.2).finished();
  const prefopt::IdsDecision d = prefopt::ids_decide(g, Eigen::MatrixXd::Zero(3, 3), 4.0, 0.5);
  CHECK(d.incumbent == 1);
  CHECK(d.informative == 1);
  CHECK(d.probability == 0.0);
  prefopt::CounterRng rng(0, 1);
  CHECK(prefopt::ids_select(g, Eigen::MatrixXd::Zero(3, 3), 4.0, 0.5, rng) == Pair{1, 1});
}

TEST_CASE("ids matches exhaustive (x, p) enumeration") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = 3 + trial % 3;
    const oracle::Tables t = oracle::random_tables(gen, n, trial % 2 == 0);
    const double beta_tilde = 4.0 * (1 + trial % 3);
    const double rho = 0.1 * (1 + trial % 5);
    const prefopt::IdsDecision d = prefopt::ids_decide(t.g, t.sigma, beta_tilde, rho);
    const oracle::IdsReference r = oracle::ids(t.g, t.sigma, beta_tilde, rho);
    CHECK(d.incumbent == r.incumbent);
    CHECK(d.informative == r.informative);
    CHECK(d.probability == r.probability);
    CHECK(d.ratio == doctest::Approx(r.ratio).epsilon(1e-12));
  }
}

TEST_CASE("ids explores with probability p") {
  const Eigen::VectorXd g = (Eigen::VectorXd(3) << 0.0, 0.3, 0.1).finished();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(3, 3, 0.2);
  sigma.diagonal().setZero();
  const prefopt::IdsDecision d = prefopt::ids_decide(g, sigma, 4.0, 0.5);
  REQUIRE(d.probability > 0.0);
  prefopt::CounterRng rng(5, 1);
  int explored = 0;
  for (int k = 0; k < 20000; ++k) {
    const Pair p = prefopt::ids_select(g, sigma, 4.0, 0.5, rng);
    CHECK(p.first == d.incumbent);
    explored += p.second != p.first;
  }
  CHECK(explored / 20000.0 == doctest::Approx(d.probability).epsilon(0.05));
}

TEST_CASE("Policy respects the mask and is deterministic") {
  std::mt19937_64 gen(9);
  for (PolicyKind kind : {PolicyKind::kMaxMinLcb, PolicyKind::kMaxInP, PolicyKind::kRucb,
                          PolicyKind::kMultiSbm, PolicyKind::kDoubler, PolicyKind::kIds}) {
    prefopt::Policy a(kind, 11), b(kind, 11);
    for (int step = 0; step < 50; ++step) {
      const oracle::Tables t = oracle::random_tables(gen, 6);
      const prefopt::DuelingTables tables{t.g, t.prob, t.sigma, 0.5, 0.3, 0.25};
      const Pair pa = a.select(tables);
      CHECK(pa == b.select(tables));
      const Mask& mask = a.last_mask();
      CHECK(pa.first >= 0);
      CHECK(pa.second < 6);
      if (kind == PolicyKind::kMaxMinLcb || kind == PolicyKind::kMaxInP || kind == PolicyKind::kRucb) {
        CHECK(mask(pa.first));
        CHECK(mask(pa.second));
      }
      if (kind == PolicyKind::kMultiSbm) CHECK(mask(pa.second));
      if (kind == PolicyKind::kDoubler) CHECK(mask(pa.first));
      if (kind == PolicyKind::kIds) CHECK(mask.all());
      if (a.uses_mask()) {
        CHECK((mask == prefopt::plausible_maximizers(t.prob, t.sigma, 0.5)).all());
      }
      a.observe(pa, 1);
      b.observe(pa, 1);
    }
  }
}

TEST_CASE("maxminlcb restriction toggle") {
  prefopt::Policy on(PolicyKind::kMaxMinLcb, 0, true), off(PolicyKind::kMaxMinLcb, 0, false);
  CHECK(on.uses_mask());
  CHECK_FALSE(off.uses_mask());
  CHECK(prefopt::Policy(PolicyKind::kRucb, 0, false).uses_mask());
  CHECK_FALSE(prefopt::Policy(PolicyKind::kIds, 0, true).uses_mask());
}

TEST_CASE("selections are unchanged when every utility is shifted") {
  std::mt19937_64 gen(10);
  for (PolicyKind kind : {PolicyKind::kMaxMinLcb, PolicyKind::kMaxInP, PolicyKind::kRucb,
                          PolicyKind::kMultiSbm, PolicyKind::kDoubler, PolicyKind::kIds}) {
    prefopt::Policy a(kind, 3), b(kind, 3);
    for (int step = 0; step < 30; ++step) {
      const oracle::Tables t = oracle::random_tables(gen, 5, true);
      // Dyadic utilities: the shift is exact, so both tables are identical.
      const Eigen::VectorXd shifted = (t.g.array() + 4.0).matrix();
      const Eigen::MatrixXd shifted_prob = prefopt::pair_probabilities(shifted);
      const Pair pa = a.select(prefopt::DuelingTables{t.g, t.prob, t.sigma, 1.0, 0.5, 0.25});
      const Pair pb = b.select(prefopt::DuelingTables{shifted, shifted_prob, t.sigma, 1.0, 0.5, 0.25});
      CHECK(pa == pb);
      a.observe(pa, 0);
      b.observe(pb, 0);
    }
  }
}

TEST_CASE("Policy rejects tables of the wrong feedback kind") {
  const Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  prefopt::Policy direct(PolicyKind::kLgpUcb, 0);
  CHECK_THROWS_AS(direct.select(prefopt::DuelingTables{v, m, m, 1.0, 1.0, 0.25}), std::logic_error);
  prefopt::Policy dueling(PolicyKind::kRucb, 0);
  CHECK_THROWS_AS(dueling.select(prefopt::DirectTables{v, v, 1.0}), std::logic_error);
  CHECK_THROWS_AS(prefopt::maxinp_select(m, Mask::Constant(3, false)), std::invalid_argument);
}
