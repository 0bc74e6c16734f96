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

#include "prefopt/policies.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace prefopt {

namespace {

using Eigen::Index;

void require_square(const Eigen::MatrixXd& table, const Mask& mask, const char* who) {
  if (table.rows() != table.cols() || mask.size() != table.rows()) {
    throw std::invalid_argument(std::string(who) + ": table must be square and match the mask");
  }
  if (!mask.any()) throw std::invalid_argument(std::string(who) + ": mask is empty");
}

Index nth_masked(const Mask& mask, Index k) {
  for (Index i = 0; i < mask.size(); ++i) {
    if (mask(i) && k-- == 0) return i;
  }
  throw std::logic_error("nth_masked: index beyond mask size");
}

}  // namespace

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kinds = {
      PolicyKind::kMaxMinLcb, PolicyKind::kMaxInP, PolicyKind::kRucb,   PolicyKind::kMultiSbm,
      PolicyKind::kDoubler,   PolicyKind::kIds,    PolicyKind::kLgpUcb, PolicyKind::kIndUcb};
  return kinds;
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kMaxMinLcb: return "maxminlcb";
    case PolicyKind::kMaxInP: return "maxinp";
    case PolicyKind::kRucb: return "rucb";
    case PolicyKind::kMultiSbm: return "multisbm";
    case PolicyKind::kDoubler: return "doubler";
    case PolicyKind::kIds: return "ids";
    case PolicyKind::kLgpUcb: return "lgp-ucb";
    case PolicyKind::kIndUcb: return "ind-ucb";
  }
  throw std::logic_error("unhandled policy");
}

PolicyKind parse_policy(std::string_view name) {
  for (PolicyKind kind : all_policies()) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

FeedbackMode feedback_mode(PolicyKind kind) {
  return (kind == PolicyKind::kLgpUcb || kind == PolicyKind::kIndUcb) ? FeedbackMode::kDirect
                                                                       : FeedbackMode::kDueling;
}

Index lgp_ucb_select(const Eigen::VectorXd& ucb) {
  if (ucb.size() == 0) throw std::invalid_argument("lgp_ucb_select: empty table");
  Index best = 0;
  for (Index i = 1; i < ucb.size(); ++i) {
    if (ucb(i) > ucb(best)) best = i;
  }
  return best;
}

Index ind_ucb_select(const Eigen::VectorXd& counts, const Eigen::VectorXd& means,
                     std::int64_t t) {
  if (counts.size() == 0 || counts.size() != means.size()) {
    throw std::invalid_argument("ind_ucb_select: counts and means must be nonempty and aligned");
  }
  for (Index i = 0; i < counts.size(); ++i) {
    if (counts(i) <= 0.0) return i;
  }
  const double log_t = std::log(static_cast<double>(std::max<std::int64_t>(t, 1)));
  Index best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < counts.size(); ++i) {
    const double value = means(i) + std::sqrt(2.0 * log_t / counts(i));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

Index ucb_response(const Eigen::MatrixXd& ucb, const Mask& mask, Index reference) {
  require_square(ucb, mask, "ucb_response");
  Index best = -1;
  for (Index x = 0; x < ucb.rows(); ++x) {
    if (mask(x) && (best < 0 || ucb(x, reference) > ucb(best, reference))) best = x;
  }
  return best;
}

Pair maxminlcb_select(const Eigen::MatrixXd& lcb, const Mask& mask, double* objective) {
  require_square(lcb, mask, "maxminlcb_select");
  Pair best{-1, -1};
  double best_value = -std::numeric_limits<double>::infinity();
  for (Index leader = 0; leader < lcb.rows(); ++leader) {
    if (!mask(leader)) continue;
    Index follower = -1;
    for (Index x = 0; x < lcb.cols(); ++x) {
      if (mask(x) && (follower < 0 || lcb(leader, x) < lcb(leader, follower))) follower = x;
    }
    const double value = lcb(leader, follower);
    if (best.first < 0 || value > best_value) {
      best = {leader, follower};
      best_value = value;
    }
  }
  if (objective != nullptr) *objective = best_value;
  return best;
}

Pair maxinp_select(const Eigen::MatrixXd& sigma, const Mask& mask) {
  require_square(sigma, mask, "maxinp_select");
  Pair best{-1, -1};
  for (Index i = 0; i < sigma.rows(); ++i) {
    if (!mask(i)) continue;
    for (Index j = 0; j < sigma.cols(); ++j) {
      if (!mask(j)) continue;
      if (best.first < 0 || sigma(i, j) > sigma(best.first, best.second)) best = {i, j};
    }
  }
  return best;
}

Pair rucb_select(const Eigen::MatrixXd& ucb, const Mask& mask, CounterRng& rng) {
  require_square(ucb, mask, "rucb_select");
  const Index reference = nth_masked(mask, rng.uniform_index(mask.count()));
  return {ucb_response(ucb, mask, reference), reference};
}

Pair multisbm_select(const Eigen::MatrixXd& ucb, const Mask& mask, MultiSbmState& state) {
  require_square(ucb, mask, "multisbm_select");
  if (state.carried < 0 || state.carried >= ucb.rows()) {
    throw std::out_of_range("multisbm_select: carried arm outside grid");
  }
  const Index first = state.carried;
  const Index second = ucb_response(ucb, mask, first);
  state.carried = second;
  return {first, second};
}

Pair doubler_select(const Eigen::MatrixXd& ucb, const Mask& mask, DoublerState& state,
                    CounterRng& rng) {
  require_square(ucb, mask, "doubler_select");
  if (state.pool.empty()) throw std::logic_error("doubler_select: empty reference pool");
  const auto draw = rng.uniform_index(static_cast<std::int64_t>(state.pool.size()));
  const Index reference = state.pool[static_cast<std::size_t>(draw)];
  const Index chosen = ucb_response(ucb, mask, reference);
  state.next_pool.push_back(chosen);
  if (++state.step_in_epoch == state.epoch_length()) {
    state.pool.swap(state.next_pool);
    state.next_pool.clear();
    state.step_in_epoch = 0;
    ++state.epoch;
  }
  return {chosen, reference};
}

IdsDecision ids_decide(const Eigen::VectorXd& utility, const Eigen::MatrixXd& sigma,
                       double beta_tilde, double rho, Index null_index) {
  const Index n = utility.size();
  if (n == 0 || sigma.rows() != n || sigma.cols() != n) {
    throw std::invalid_argument("ids_decide: utility and sigma tables must be aligned");
  }
  if (null_index < 0 || null_index >= n) throw std::out_of_range("ids_decide: null index");
  IdsDecision out;
  // argmax_x h(x, x_null) = argmax_x g(x) - g(x_null).
  for (Index x = 1; x < n; ++x) {
    if (utility(x) - utility(null_index) > utility(out.incumbent) - utility(null_index)) {
      out.incumbent = x;
    }
  }
  const Index star = out.incumbent;
  double u = -std::numeric_limits<double>::infinity();
  for (Index x = 0; x < n; ++x) {
    u = std::max(u, utility(x) - utility(star) + beta_tilde * sigma(x, star));
  }
  out.optimistic_gap = u;
  out.informative = star;
  out.ratio = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < n; ++x) {
    if (x == star || !(sigma(star, x) > 0.0)) continue;
    const double gap = u + utility(star) - utility(x);
    const double info = std::log1p(sigma(star, x) * sigma(star, x) / rho);
    if (!(info > 0.0)) continue;
    for (int k = 1; k <= kIdsProbabilityGrid; ++k) {
      const double p = static_cast<double>(k) / kIdsProbabilityGrid;
      const double mix = (1.0 - p) * u + p * gap;
      const double ratio = mix * mix / (p * info);
      if (ratio < out.ratio) {
        out.ratio = ratio;
        out.informative = x;
        out.probability = p;
      }
    }
  }
  if (out.informative == star) {
    out.probability = 0.0;
    out.ratio = 0.0;
  }
  return out;
}

Pair ids_select(const Eigen::VectorXd& utility, const Eigen::MatrixXd& sigma, double beta_tilde,
                double rho, CounterRng& rng) {
  const IdsDecision d = ids_decide(utility, sigma, beta_tilde, rho);
  const bool explore = rng.bernoulli(d.probability);
  return {d.incumbent, explore ? d.informative : d.incumbent};
}

Policy::Policy(PolicyKind kind, std::uint64_t seed, bool restrict_to_maximizers)
    : kind_(kind), restrict_(restrict_to_maximizers), rng_(seed, 1) {}

bool Policy::uses_mask() const {
  switch (kind_) {
    case PolicyKind::kMaxMinLcb: return restrict_;
    case PolicyKind::kMaxInP:
    case PolicyKind::kRucb:
    case PolicyKind::kMultiSbm:
    case PolicyKind::kDoubler: return true;
    default: return false;
  }
}

Pair Policy::select(const DuelingTables& tables) {
  if (feedback_mode(kind_) != FeedbackMode::kDueling) {
    throw std::logic_error("policy " + to_string(kind_) + " needs direct-feedback tables");
  }
  const Index n = tables.prob.rows();
  last_mask_fell_back_ = false;
  if (uses_mask()) {
    last_mask_ = plausible_maximizers(tables.prob, tables.sigma, tables.beta,
                                      &last_mask_fell_back_);
  } else {
    last_mask_ = Mask::Constant(n, true);
  }
  switch (kind_) {
    case PolicyKind::kMaxMinLcb: {
      const Eigen::MatrixXd lcb = tables.prob - tables.beta * tables.sigma;
      return maxminlcb_select(lcb, last_mask_);
    }
    case PolicyKind::kMaxInP: return maxinp_select(tables.sigma, last_mask_);
    case PolicyKind::kIds:
      return ids_select(tables.utility, tables.sigma, tables.beta / tables.lipschitz, tables.rho,
                        rng_);
    default: break;
  }
  const Eigen::MatrixXd ucb = tables.prob + tables.beta * tables.sigma;
  switch (kind_) {
    case PolicyKind::kRucb: return rucb_select(ucb, last_mask_, rng_);
    case PolicyKind::kMultiSbm: return multisbm_select(ucb, last_mask_, multisbm_);
    case PolicyKind::kDoubler: return doubler_select(ucb, last_mask_, doubler_, rng_);
    default: break;
  }
  throw std::logic_error("unhandled preference policy");
}

Index Policy::select(const DirectTables& tables) {
  if (kind_ == PolicyKind::kLgpUcb) {
    return lgp_ucb_select((tables.prob + tables.beta * tables.sigma).eval());
  }
  if (kind_ == PolicyKind::kIndUcb) {
    if (counts_.size() != tables.prob.size()) {
      counts_ = Eigen::VectorXd::Zero(tables.prob.size());
      sums_ = Eigen::VectorXd::Zero(tables.prob.size());
    }
    const Eigen::VectorXd means =
        (counts_.array() > 0.0).select(sums_.array() / counts_.array().max(1.0), 0.0);
    return ind_ucb_select(counts_, means, steps_ + 1);
  }
  throw std::logic_error("policy " + to_string(kind_) + " needs preference tables");
}

void Policy::observe(const Pair& query, int outcome) {
  ++steps_;
  if (kind_ == PolicyKind::kIndUcb && query.first < counts_.size()) {
    counts_(query.first) += 1.0;
    sums_(query.first) += outcome;
  }
}

}  // namespace prefopt
