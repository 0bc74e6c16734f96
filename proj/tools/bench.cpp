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

// prefopt-bench: runs one benchmark cell, or a policy x environment grid with
// the `compare` subcommand, and writes trace.csv / summary.json.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "prefopt/bench.hpp"

namespace {

struct CliOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> env;
  std::optional<std::string> policy;
  std::optional<std::int64_t> horizon;
  std::optional<std::string> seeds;
  std::optional<double> delta;
  std::optional<std::string> beta;
  std::optional<double> lambda;
  std::optional<std::string> kernel;
  std::optional<double> lengthscale;
  std::optional<double> variance;
  std::optional<double> bound;
  std::optional<std::string> out;
  std::optional<bool> restrict_to_maximizers;
  unsigned threads = 1;
};

void add_common(CLI::App& app, CliOptions& o) {
  app.add_option("--config", o.config_path, "Config file (key = value text or JSON)");
  app.add_option("--horizon", o.horizon, "Steps per trial");
  app.add_option("--seeds", o.seeds, "Seeds, e.g. 0..19 or 1,2,5");
  app.add_option("--delta", o.delta, "Confidence level delta in (0, 1)");
  app.add_option("--beta", o.beta, "theoretical | fixed:<value> | <value>");
  app.add_option("--lambda", o.lambda, "Regularization lambda");
  app.add_option("--kernel", o.kernel, "rbf | matern12 | matern32 | matern52 | linear");
  app.add_option("--lengthscale", o.lengthscale, "Kernel lengthscale (unit-cube inputs)");
  app.add_option("--variance", o.variance, "Kernel variance");
  app.add_option("--bound", o.bound, "Norm bound B");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--restrict-to-maximizers", o.restrict_to_maximizers,
                 "Restrict MaxMinLCB to plausible maximizers (default false)");
  app.add_option("--threads", o.threads, "Trials run concurrently")->check(CLI::PositiveNumber);
}

prefopt::RunConfig resolve(const CliOptions& o) {
  prefopt::RunConfig c;
  // Command-line preset; a config file or explicit flag overrides it.
  c.restrict_to_maximizers = false;
  if (o.config_path) c = prefopt::load_config(*o.config_path);
  if (o.env) c.env = *o.env;
  if (o.policy) c.policy = *o.policy;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.seeds) c.seeds = prefopt::parse_seeds(*o.seeds);
  if (o.delta) c.delta = *o.delta;
  if (o.beta) {
    const std::string& b = *o.beta;
    const bool bare_number = !b.empty() && (std::isdigit(static_cast<unsigned char>(b[0])) ||
                                            b[0] == '.' || b[0] == '-');
    c.beta_mode = prefopt::parse_beta_mode(bare_number ? "fixed:" + b : b);
  }
  if (o.lambda) c.lambda = *o.lambda;
  if (o.kernel) c.kernel.family = prefopt::parse_kernel_family(*o.kernel);
  if (o.lengthscale) c.kernel.lengthscale = *o.lengthscale;
  if (o.variance) c.kernel.variance = *o.variance;
  if (o.bound) c.bound = *o.bound;
  if (o.out) c.out_dir = *o.out;
  if (o.restrict_to_maximizers) c.restrict_to_maximizers = *o.restrict_to_maximizers;
  return c;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_single(const prefopt::RunConfig& config, unsigned threads) {
  config.validate();
  const auto records = prefopt::run_trials(config, threads);
  const auto summary = prefopt::aggregate(records);
  prefopt::emit(records, summary, config, config.out_dir);
  std::cout << config.env << " " << config.policy << " T=" << config.horizon
            << " seeds=" << summary.n_seeds << " cumulative regret " << summary.mean;
  if (summary.single_seed) {
    std::cout << " (single seed, no standard error)";
  } else {
    std::cout << " +- " << summary.std_error;
  }
  std::cout << "\nwrote " << config.out_dir << "\n";
  return 0;
}

int run_compare(const prefopt::RunConfig& base, const std::vector<std::string>& envs,
                const std::vector<std::string>& policies, unsigned threads) {
  std::vector<prefopt::ComparisonCell> cells;
  for (const auto& env : envs) {
    for (const auto& policy : policies) {
      prefopt::RunConfig c = base;
      c.env = env;
      c.policy = policy;
      c.out_dir = (std::filesystem::path(base.out_dir) / env / policy).string();
      c.validate();
      const auto records = prefopt::run_trials(c, threads);
      const auto summary = prefopt::aggregate(records);
      prefopt::emit(records, summary, c, c.out_dir);
      cells.push_back({env, policy, summary});
      std::cerr << env << " / " << policy << ": " << summary.mean << "\n";
    }
  }
  const std::string table = prefopt::comparison_table(envs, policies, cells);
  std::cout << table;
  const auto path = std::filesystem::path(base.out_dir) / "table.txt";
  std::ofstream out(path);
  if (!out || !(out << table)) throw std::runtime_error("cannot write '" + path.string() + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-based bandit benchmark"};
  app.fallthrough();
  CliOptions opts;
  add_common(app, opts);
  app.add_option("--env", opts.env, "Test function");
  app.add_option("--policy", opts.policy, "Acquisition policy");

  std::string envs = "ackley,branin,eggholder,hoelder,matyas,michalewicz,rosenbrock";
  std::string policies = "maxminlcb,maxinp,rucb,multisbm,doubler,ids";
  CLI::App* compare = app.add_subcommand("compare", "Run every policy on every environment");
  compare->add_option("--envs", envs, "Comma-separated environments");
  compare->add_option("--policies", policies, "Comma-separated policies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const prefopt::RunConfig config = resolve(opts);
    if (*compare) return run_compare(config, split_list(envs), split_list(policies), opts.threads);
    return run_single(config, opts.threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
