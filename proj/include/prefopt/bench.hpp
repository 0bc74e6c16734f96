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

#ifndef PREFOPT_BENCH_HPP_
#define PREFOPT_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefopt/confidence.hpp"
#include "prefopt/environment.hpp"
#include "prefopt/kernel.hpp"
#include "prefopt/policies.hpp"

namespace prefopt {

/// One benchmark cell: environment x policy x hyperparameters x seeds.
struct RunConfig {
  std::string env = "ackley";
  std::string policy = "maxminlcb";
  std::int64_t horizon = 2000;
  std::vector<std::uint64_t> seeds = {0};
  double delta = 0.1;
  double lambda = 0.1;
  double bound = 1.0;
  BetaMode beta_mode = BetaMode::fixed(1.0);
  KernelSpec kernel{KernelFamily::kRbf, 1.0, 0.1};
  bool restrict_to_maximizers = true;
  std::string out_dir = "runs";

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;
  ConfidenceConfig confidence() const;

  bool operator==(const RunConfig&) const = default;
};

/// "0..19", "1,4,7" or a mix such as "0..3,10".
std::vector<std::uint64_t> parse_seeds(std::string_view text);
std::string format_seeds(const std::vector<std::uint64_t>& seeds);

/// Flat `key = value` text, one field per line; `#` starts a comment.
/// Scalars are written in shortest round-trip decimal form.
std::string to_text(const RunConfig& config);
RunConfig parse_config_text(std::string_view text);

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Reads either the text format or JSON. A JSON document with a "config"
/// member (such as summary.json) yields that member.
RunConfig load_config(const std::filesystem::path& path);

struct StepRow {
  std::int64_t t = 0;
  Eigen::Index first = 0;
  Eigen::Index second = 0;  // -1 for direct feedback
  int outcome = 0;
  double step_regret = 0.0;
  double cum_regret = 0.0;
  double sigma_max = 0.0;
  double fitted_norm = 0.0;
  bool fit_converged = true;

  bool operator==(const StepRow&) const = default;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  std::vector<StepRow> rows;
  double cum_regret = 0.0;
  double wall_ms = 0.0;
  std::size_t nonconverged_fits = 0;
  std::size_t empty_mask_fallbacks = 0;
};

/// Runs the select / sample / append / refit loop for `config.horizon` steps
/// on `env`. Deterministic in (config, env, seed) apart from wall_ms.
TrialRecord run_trial(const RunConfig& config, const Environment& env, std::uint64_t seed);
/// Same, on the named test environment.
TrialRecord run_trial(const RunConfig& config, std::uint64_t seed);

/// All seeds of `config`, up to `threads` at a time; results in seed order.
std::vector<TrialRecord> run_trials(const RunConfig& config, unsigned threads = 1);

struct Summary {
  std::size_t n_seeds = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// Standard error is undefined for one seed; reported as 0 with this set.
  bool single_seed = false;
  std::vector<double> mean_curve;
};

Summary aggregate(std::vector<TrialRecord> records);

/// Writes trace.csv and summary.json under `out_dir`, creating it.
void emit(const std::vector<TrialRecord>& records, const Summary& summary,
          const RunConfig& config, const std::filesystem::path& out_dir);

/// Plain-text grid of "mean ± se" with one row per environment and one
/// column per policy.
struct ComparisonCell {
  std::string env;
  std::string policy;
  Summary summary;
};
std::string comparison_table(const std::vector<std::string>& envs,
                             const std::vector<std::string>& policies,
                             const std::vector<ComparisonCell>& cells);

}  // namespace prefopt

#endif  // PREFOPT_BENCH_HPP_
