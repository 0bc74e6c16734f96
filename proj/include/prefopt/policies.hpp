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

#ifndef PREFOPT_POLICIES_HPP_
#define PREFOPT_POLICIES_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "prefopt/confidence.hpp"
#include "prefopt/history.hpp"
#include "prefopt/rng.hpp"

namespace prefopt {

// Action selection. The *_select free functions operate on explicit tables
// (one entry per action or per ordered action pair) so they can be checked
// against exhaustive enumeration; Policy wires them to the per-step state.
//
// Pair tables are indexed (x, x'): prob(x, x') = s(h_t(x, x')), and likewise
// for sigma, lcb and ucb. Ties always go to the smallest index; for pairs the
// follower / inner choice is resolved before the leader / outer one.

enum class PolicyKind { kMaxMinLcb, kMaxInP, kRucb, kMultiSbm, kDoubler, kIds, kLgpUcb, kIndUcb };

const std::vector<PolicyKind>& all_policies();
/// maxminlcb, maxinp, rucb, multisbm, doubler, ids, lgp-ucb, ind-ucb.
std::string to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);
FeedbackMode feedback_mode(PolicyKind kind);

struct Pair {
  Eigen::Index first = 0;
  Eigen::Index second = 0;
  bool operator==(const Pair&) const = default;
};

// --- direct feedback -------------------------------------------------------

/// argmax_x ucb(x).
Eigen::Index lgp_ucb_select(const Eigen::VectorXd& ucb);

/// Untried arms first in index order, then argmax mean_i + sqrt(2 log t / n_i).
Eigen::Index ind_ucb_select(const Eigen::VectorXd& counts, const Eigen::VectorXd& means,
                            std::int64_t t);

// --- preference feedback ---------------------------------------------------

/// argmax over masked x of ucb(x, reference).
Eigen::Index ucb_response(const Eigen::MatrixXd& ucb, const Mask& mask, Eigen::Index reference);

/// Stackelberg game on the LCB table over the mask: the follower answers
/// each leader x with argmin_x' lcb(x, x'); the leader maximizes the value
/// it is left with. `objective` receives that max-min value.
Pair maxminlcb_select(const Eigen::MatrixXd& lcb, const Mask& mask, double* objective = nullptr);

/// Lexicographically first argmax of sigma over mask x mask.
Pair maxinp_select(const Eigen::MatrixXd& sigma, const Mask& mask);

/// Reference x' uniform over the mask, x = ucb_response(x').
Pair rucb_select(const Eigen::MatrixXd& ucb, const Mask& mask, CounterRng& rng);

struct MultiSbmState {
  Eigen::Index carried = 0;
};

/// x = previous x', x' = ucb_response(x).
Pair multisbm_select(const Eigen::MatrixXd& ucb, const Mask& mask, MultiSbmState& state);

/// Epoch e lasts 2^e steps (e = 1, 2, ...). Each step draws the reference
/// uniformly from the pool and answers it with ucb_response; at the end of
/// the epoch the pool becomes the multiset of arms chosen that way.
struct DoublerState {
  int epoch = 1;
  std::int64_t step_in_epoch = 0;
  std::vector<Eigen::Index> pool{0};
  std::vector<Eigen::Index> next_pool;

  std::int64_t epoch_length() const { return std::int64_t{1} << epoch; }
};

/// Returns (maximizer, reference).
Pair doubler_select(const Eigen::MatrixXd& ucb, const Mask& mask, DoublerState& state,
                    CounterRng& rng);

/// Deterministic part of the IDS rule.
struct IdsDecision {
  Eigen::Index incumbent = 0;    // argmax_x h_t(x, x_null)
  Eigen::Index informative = 0;  // ratio minimizer; == incumbent if none usable
  double probability = 0.0;      // p_t; 0 when no informative action exists
  double ratio = 0.0;
  double optimistic_gap = 0.0;   // u_t
};

inline constexpr int kIdsProbabilityGrid = 101;

/// `utility` is g with h_t(x, x') = g(x) - g(x'); `beta_tilde` is the gap
/// exploration coefficient and `rho` = lambda * kappa. The ratio
/// ((1 - p) u + p gap(x))^2 / (p log(1 + sigma(x*, x)^2 / rho)) is minimized
/// over x != x* with nonzero width and p in {k / 101 : k = 1..101}.
IdsDecision ids_decide(const Eigen::VectorXd& utility, const Eigen::MatrixXd& sigma,
                       double beta_tilde, double rho, Eigen::Index null_index = 0);

/// Plays (x*, x_informative) with probability p_t, else (x*, x*).
Pair ids_select(const Eigen::VectorXd& utility, const Eigen::MatrixXd& sigma, double beta_tilde,
                double rho, CounterRng& rng);

/// Everything a preference policy may look at in one step.
struct DuelingTables {
  const Eigen::VectorXd& utility;  // g on the grid
  const Eigen::MatrixXd& prob;     // s(g_i - g_j)
  const Eigen::MatrixXd& sigma;    // sigma^D
  double beta = 1.0;
  double rho = 1.0;
  double lipschitz = 0.25;
};

struct DirectTables {
  const Eigen::VectorXd& prob;   // s(f_t(x))
  const Eigen::VectorXd& sigma;  // sigma_t(x)
  double beta = 1.0;
};

/// One policy with its persistent per-trial state.
class Policy {
 public:
  /// `restrict_to_maximizers` only affects maxminlcb; the other preference
  /// baselines are defined in terms of M_t and always use it, IDS never does.
  Policy(PolicyKind kind, std::uint64_t seed, bool restrict_to_maximizers = true);

  PolicyKind kind() const { return kind_; }
  bool uses_mask() const;

  Pair select(const DuelingTables& tables);
  Eigen::Index select(const DirectTables& tables);
  /// Feeds back the outcome of the last query (used by ind-ucb).
  void observe(const Pair& query, int outcome);

  /// Mask used by the most recent dueling selection.
  const Mask& last_mask() const { return last_mask_; }
  bool last_mask_fell_back() const { return last_mask_fell_back_; }

 private:
  PolicyKind kind_;
  bool restrict_;
  CounterRng rng_;
  MultiSbmState multisbm_;
  DoublerState doubler_;
  Eigen::VectorXd counts_;
  Eigen::VectorXd sums_;
  std::int64_t steps_ = 0;
  Mask last_mask_;
  bool last_mask_fell_back_ = false;
};

}  // namespace prefopt

#endif  // PREFOPT_POLICIES_HPP_
