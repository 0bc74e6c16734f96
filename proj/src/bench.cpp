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

#include "prefopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "prefopt/estimator.hpp"
#include "prefopt/gram.hpp"
#include "prefopt/sigmoid.hpp"

namespace prefopt {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' is not a number: " +
                                std::string(text));
  }
  return v;
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' is not an integer: " +
                                std::string(text));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw std::invalid_argument("config: '" + std::string(key) + "' is not a boolean: " +
                              std::string(text));
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void set_field(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "env") c.env = std::string(value);
  else if (key == "policy") c.policy = std::string(value);
  else if (key == "horizon") c.horizon = parse_int(key, value);
  else if (key == "seeds") c.seeds = parse_seeds(value);
  else if (key == "delta") c.delta = parse_double(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "bound") c.bound = parse_double(key, value);
  else if (key == "beta") c.beta_mode = parse_beta_mode(value);
  else if (key == "kernel") c.kernel.family = parse_kernel_family(value);
  else if (key == "variance") c.kernel.variance = parse_double(key, value);
  else if (key == "lengthscale") c.kernel.lengthscale = parse_double(key, value);
  else if (key == "restrict_to_maximizers") c.restrict_to_maximizers = parse_bool(key, value);
  else if (key == "out_dir") c.out_dir = std::string(value);
  else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

double max_coeff_or_zero(const Eigen::MatrixXd& m) { return m.size() ? m.maxCoeff() : 0.0; }

TrialRecord run_direct(const RunConfig& config, PolicyKind kind, const Environment& env,
                       std::uint64_t seed) {
  const ConfidenceConfig conf = config.confidence();
  const GridKernel<double> grid(config.kernel, env.unit_points);
  const Eigen::Index n = env.size();
  History hist(FeedbackMode::kDirect, n);
  GridPosterior<double> posterior(grid, FeedbackMode::kDirect, conf.rho());
  FeedbackSampler sampler(FeedbackMode::kDirect, CounterRng(seed, 0));
  Policy policy(kind, seed, config.restrict_to_maximizers);
  const bool model_based = kind == PolicyKind::kLgpUcb;

  TrialRecord record;
  record.seed = seed;
  record.rows.reserve(static_cast<std::size_t>(config.horizon));
  EstimatorFit<double> fitted;
  Eigen::VectorXd utility = Eigen::VectorXd::Zero(n);
  double cum = 0.0;
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    Eigen::VectorXd prob = utility.unaryExpr([](double a) { return sigmoid(a); });
    Eigen::VectorXd sigma = model_based ? posterior.sigma() : Eigen::VectorXd::Zero(n);
    const double beta_t = beta(conf, posterior.info_gain());
    const Eigen::Index x = policy.select(DirectTables{prob, sigma, beta_t});
    const int y = sampler.sample(env, x, x);
    policy.observe({x, x}, y);

    StepRow row;
    row.t = t;
    row.first = x;
    row.second = -1;
    row.outcome = y;
    row.step_regret = logistic_regret_step(env, x);
    cum += row.step_regret;
    row.cum_regret = cum;
    row.sigma_max = max_coeff_or_zero(sigma);

    hist.append(x, x, y);
    if (model_based) {
      posterior.append(x, x);
      fitted = fit<double>(hist, grid, conf.effective_lambda(), fitted.alpha);
      utility = grid_utility<double>(fitted.alpha, hist, grid);
      row.fitted_norm = rkhs_norm(fitted, hist, grid);
      row.fit_converged = fitted.converged;
      if (!fitted.converged) ++record.nonconverged_fits;
    }
    record.rows.push_back(row);
  }
  record.cum_regret = cum;
  return record;
}

TrialRecord run_dueling(const RunConfig& config, PolicyKind kind, const Environment& env,
                        std::uint64_t seed) {
  const ConfidenceConfig conf = config.confidence();
  const GridKernel<double> grid(config.kernel, env.unit_points);
  const Eigen::Index n = env.size();
  History hist(FeedbackMode::kDueling, n);
  GridPosterior<double> posterior(grid, FeedbackMode::kDueling, conf.rho());
  FeedbackSampler sampler(FeedbackMode::kDueling, CounterRng(seed, 0));
  Policy policy(kind, seed, config.restrict_to_maximizers);

  TrialRecord record;
  record.seed = seed;
  record.rows.reserve(static_cast<std::size_t>(config.horizon));
  EstimatorFit<double> fitted;
  Eigen::VectorXd utility = Eigen::VectorXd::Zero(n);
  double cum = 0.0;
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    const Eigen::MatrixXd prob = pair_probabilities(utility);
    const Eigen::MatrixXd sigma = posterior.sigma_pairs();
    const double beta_t = beta(conf, posterior.info_gain());
    const Pair q = policy.select(
        DuelingTables{utility, prob, sigma, beta_t, conf.rho(), conf.lipschitz()});
    if (policy.last_mask_fell_back()) ++record.empty_mask_fallbacks;
    const int y = sampler.sample(env, q.first, q.second);
    policy.observe(q, y);

    StepRow row;
    row.t = t;
    row.first = q.first;
    row.second = q.second;
    row.outcome = y;
    row.step_regret = dueling_regret_step(env, q.first, q.second);
    cum += row.step_regret;
    row.cum_regret = cum;
    row.sigma_max = max_coeff_or_zero(sigma);

    hist.append(q.first, q.second, y);
    posterior.append(q.first, q.second);
    fitted = fit<double>(hist, grid, conf.effective_lambda(), fitted.alpha);
    utility = grid_utility<double>(fitted.alpha, hist, grid);
    row.fitted_norm = rkhs_norm(fitted, hist, grid);
    row.fit_converged = fitted.converged;
    if (!fitted.converged) ++record.nonconverged_fits;
    record.rows.push_back(row);
  }
  record.cum_regret = cum;
  return record;
}

}  // namespace

void RunConfig::validate() const {
  parse_test_function(env);
  parse_policy(policy);
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  confidence().validate();
  kernel.validate();
  if (beta_mode.kind == BetaMode::Kind::kFixed &&
      (!(beta_mode.value >= 0.0) || !std::isfinite(beta_mode.value))) {
    throw std::invalid_argument("fixed beta must be nonnegative and finite");
  }
}

ConfidenceConfig RunConfig::confidence() const {
  return ConfidenceConfig{bound, lambda, delta, beta_mode};
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [](std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw std::invalid_argument("invalid seed: '" + std::string(s) + "'");
    }
    return v;
  };
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(parse_one(item));
      continue;
    }
    const std::uint64_t lo = parse_one(item.substr(0, dots));
    const std::uint64_t hi = parse_one(item.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("invalid seed range: '" + std::string(item) + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

std::string format_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  os << "env = " << c.env << '\n'
     << "policy = " << c.policy << '\n'
     << "horizon = " << c.horizon << '\n'
     << "seeds = " << format_seeds(c.seeds) << '\n'
     << "delta = " << format_double(c.delta) << '\n'
     << "lambda = " << format_double(c.lambda) << '\n'
     << "bound = " << format_double(c.bound) << '\n'
     << "beta = " << to_string(c.beta_mode) << '\n'
     << "kernel = " << to_string(c.kernel.family) << '\n'
     << "variance = " << format_double(c.kernel.variance) << '\n'
     << "lengthscale = " << format_double(c.kernel.lengthscale) << '\n'
     << "restrict_to_maximizers = " << (c.restrict_to_maximizers ? "true" : "false") << '\n'
     << "out_dir = " << c.out_dir << '\n';
  return os.str();
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_field(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"env", c.env},
                        {"policy", c.policy},
                        {"horizon", c.horizon},
                        {"seeds", c.seeds},
                        {"delta", c.delta},
                        {"lambda", c.lambda},
                        {"bound", c.bound},
                        {"beta", to_string(c.beta_mode)},
                        {"kernel", to_string(c.kernel.family)},
                        {"variance", c.kernel.variance},
                        {"lengthscale", c.kernel.lengthscale},
                        {"restrict_to_maximizers", c.restrict_to_maximizers},
                        {"out_dir", c.out_dir}};
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.env = j.at("env").get<std::string>();
    c.policy = j.at("policy").get<std::string>();
    c.horizon = j.at("horizon").get<std::int64_t>();
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.delta = j.at("delta").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.bound = j.at("bound").get<double>();
    c.beta_mode = parse_beta_mode(j.at("beta").get<std::string>());
    c.kernel.family = parse_kernel_family(j.at("kernel").get<std::string>());
    c.kernel.variance = j.at("variance").get<double>();
    c.kernel.lengthscale = j.at("lengthscale").get<double>();
    c.restrict_to_maximizers = j.at("restrict_to_maximizers").get<bool>();
    c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config JSON: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    const nlohmann::json j = nlohmann::json::parse(text);
    return config_from_json(j.contains("config") ? j.at("config") : j);
  }
  return parse_config_text(text);
}

TrialRecord run_trial(const RunConfig& config, const Environment& env, std::uint64_t seed) {
  config.confidence().validate();
  config.kernel.validate();
  if (config.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const PolicyKind kind = parse_policy(config.policy);
  const auto start = std::chrono::steady_clock::now();
  TrialRecord record = feedback_mode(kind) == FeedbackMode::kDirect
                           ? run_direct(config, kind, env, seed)
                           : run_dueling(config, kind, env, seed);
  record.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return record;
}

TrialRecord run_trial(const RunConfig& config, std::uint64_t seed) {
  return run_trial(config, build_environment(parse_test_function(config.env)), seed);
}

std::vector<TrialRecord> run_trials(const RunConfig& config, unsigned threads) {
  config.validate();
  const Environment env = build_environment(parse_test_function(config.env));
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<TrialRecord> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run_trial(config, env, seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Summary aggregate(std::vector<TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
  const std::size_t steps = records.front().rows.size();
  for (const auto& r : records) {
    if (r.rows.size() != steps) throw std::invalid_argument("aggregate: records differ in length");
  }
  Summary s;
  s.n_seeds = records.size();
  const double n = static_cast<double>(records.size());
  double total = 0.0;
  for (const auto& r : records) total += r.cum_regret;
  s.mean = total / n;
  if (records.size() == 1) {
    s.single_seed = true;
    s.std_error = 0.0;
  } else {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.cum_regret - s.mean) * (r.cum_regret - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  s.mean_curve.assign(steps, 0.0);
  for (const auto& r : records) {
    for (std::size_t t = 0; t < steps; ++t) s.mean_curve[t] += r.rows[t].cum_regret;
  }
  for (double& v : s.mean_curve) v /= n;
  return s;
}

void emit(const std::vector<TrialRecord>& records, const Summary& summary,
          const RunConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir.string() +
                             "': " + ec.message());
  }
  std::vector<const TrialRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const TrialRecord* a, const TrialRecord* b) { return a->seed < b->seed; });

  const auto trace_path = out_dir / "trace.csv";
  std::ofstream trace(trace_path);
  if (!trace) throw std::runtime_error("cannot write '" + trace_path.string() + "'");
  trace << "seed,t,first,second,outcome,step_regret,cum_regret\n";
  for (const TrialRecord* r : sorted) {
    for (const StepRow& row : r->rows) {
      trace << r->seed << ',' << row.t << ',' << row.first << ',' << row.second << ','
            << row.outcome << ',' << format_double(row.step_regret) << ','
            << format_double(row.cum_regret) << '\n';
    }
  }
  if (!trace) throw std::runtime_error("error while writing '" + trace_path.string() + "'");

  nlohmann::json trials = nlohmann::json::array();
  for (const TrialRecord* r : sorted) {
    trials.push_back({{"seed", r->seed},
                      {"cum_regret", r->cum_regret},
                      {"wall_ms", r->wall_ms},
                      {"nonconverged_fits", r->nonconverged_fits},
                      {"empty_mask_fallbacks", r->empty_mask_fallbacks},
                      {"final_fitted_norm", r->rows.empty() ? 0.0 : r->rows.back().fitted_norm}});
  }
  const nlohmann::json doc{{"config", to_json(config)},
                           {"summary",
                            {{"n_seeds", summary.n_seeds},
                             {"mean", summary.mean},
                             {"std_error", summary.std_error},
                             {"single_seed", summary.single_seed}}},
                           {"trials", trials}};
  const auto summary_path = out_dir / "summary.json";
  std::ofstream js(summary_path);
  if (!js) throw std::runtime_error("cannot write '" + summary_path.string() + "'");
  js << doc.dump(2) << '\n';
  if (!js) throw std::runtime_error("error while writing '" + summary_path.string() + "'");
}

std::string comparison_table(const std::vector<std::string>& envs,
                             const std::vector<std::string>& policies,
                             const std::vector<ComparisonCell>& cells) {
  auto cell_text = [&](const std::string& env, const std::string& policy) -> std::string {
    for (const auto& c : cells) {
      if (c.env == env && c.policy == policy) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(2) << c.summary.mean << " ± "
           << c.summary.std_error;
        return os.str();
      }
    }
    return "-";
  };
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"f"});
  for (const auto& p : policies) grid.front().push_back(p);
  for (const auto& e : envs) {
    std::vector<std::string> line{e};
    for (const auto& p : policies) line.push_back(cell_text(e, p));
    grid.push_back(std::move(line));
  }
  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::ostringstream os;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      os << line[c] << std::string(widths[c] - width(line[c]) + (c + 1 < line.size() ? 2 : 0), ' ');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace prefopt
