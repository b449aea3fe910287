#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggq/algorithms.hpp"
#include "ggq/garnet.hpp"
#include "ggq/harness/bands.hpp"
#include "ggq/harness/config.hpp"
#include "ggq/harness/plot.hpp"
#include "ggq/io.hpp"
#include "ggq/version.hpp"

namespace ggq {

/// Worker count: GGQ_THREADS if set, else hardware concurrency, capped by the job count.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GGQ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs job(i) for i in [0, n) on a bounded pool; rethrows the first failure.
template <typename Job>
void parallel_for(std::size_t n, Job&& job) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline Problem build_problem(const ExperimentConfig& c) {
  validate_config(c);
  const SoftmaxSpec softmax(c.sigma);
  if (c.env == "garnet") {
    auto inst = generate_garnet({c.ns, c.na, c.branching, c.nf}, c.mdp_seed, c.gamma);
    BehaviorPolicy policy = uniform_behavior(inst.mdp);
    return {std::move(inst.mdp), std::move(policy), std::move(inst.features), softmax};
  }
  if (c.env == "frozenlake") {
    TabularMdp mdp = frozen_lake(c.slippery, c.gamma);
    FeatureMap features = random_features(c.nf, mdp.n_states(), mdp.n_actions(), c.mdp_seed);
    BehaviorPolicy policy = uniform_behavior(mdp);
    return {std::move(mdp), std::move(policy), std::move(features), softmax};
  }
  auto loaded = load_mdp(c.mdp_file);
  TabularMdp mdp = loaded.mdp.with_discount(c.gamma);
  FeatureMap features = loaded.features ? *loaded.features
                                        : random_features(c.nf, mdp.n_states(), mdp.n_actions(), c.mdp_seed);
  BehaviorPolicy policy = uniform_behavior(mdp);
  return {std::move(mdp), std::move(policy), std::move(features), softmax};
}

/// How one algorithm of an experiment is run.
struct AlgorithmPlan {
  std::string name;
  std::uint64_t samples_per_iter = 1;
  std::uint64_t T = 1;
  std::uint64_t eval_every = 1;
};

inline AlgorithmPlan plan_algorithm(const ExperimentConfig& c, const std::string& name) {
  AlgorithmPlan plan;
  plan.name = name;
  if (name == "nested") plan.samples_per_iter = c.B * c.T_c + c.M;
  else if (name == "minibatch") plan.samples_per_iter = c.minibatch_B;
  plan.T = c.budget > 0 ? (c.budget + plan.samples_per_iter - 1) / plan.samples_per_iter : c.T;
  plan.T = std::max<std::uint64_t>(plan.T, 1);
  plan.eval_every = c.eval_every_samples > 0
                        ? std::max<std::uint64_t>(1, c.eval_every_samples / plan.samples_per_iter)
                        : std::max<std::uint64_t>(1, c.eval_every);
  return plan;
}

inline RunResult run_one(const Problem& problem, const ExperimentConfig& c, const AlgorithmPlan& plan,
                         std::uint64_t seed) {
  RunOptions opts;
  opts.sampler = parse_sampler_kind(c.sampler);
  opts.T = plan.T;
  opts.radius = c.radius;
  opts.seed = seed;
  opts.eval_every = plan.eval_every;
  opts.final_iterate = c.final;
  opts.mc_samples = c.mc_samples;
  const StepSchedule schedule(parse_step_mode(c.schedule), {c.alpha, c.beta, c.a, c.b}, plan.T);
  if (plan.name == "vanilla") return run_vanilla(problem, schedule, opts);
  if (plan.name == "minibatch") return run_minibatch(problem, schedule, c.minibatch_B, opts);
  NestedConfig nested{plan.T, c.T_c, c.B, c.M, schedule.alpha(0), schedule.beta(0)};
  return run_nested_loop(problem, nested, opts);
}

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<AlgorithmPlan> plans;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::vector<MetricsTrace>> traces;  ///< by algorithm, one per seed
  std::map<std::string, std::map<std::string, BandSummary>> bands;  ///< metric -> algorithm -> band
  double lambda_min = 0.0;
  std::vector<std::string> warnings;
};

/// Runs every (algorithm, seed) pair and aggregates percentile bands. No file output.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  const Problem problem = build_problem(c);
  ExperimentResult result;
  result.config = c;
  result.lambda_min = problem.model().lambda_min();
  for (std::uint64_t k = 0; k < c.n_seeds; ++k) result.seeds.push_back(c.seed + k);
  for (const auto& name : c.algorithms) result.plans.push_back(plan_algorithm(c, name));

  if (std::find(c.algorithms.begin(), c.algorithms.end(), "nested") != c.algorithms.end()) {
    const auto constants = problem.constants(c.radius);
    for (auto& w : nested_step_warnings({1, c.T_c, c.B, c.M, c.alpha, c.beta}, constants.K, result.lambda_min))
      result.warnings.push_back("nested: " + w);
  }

  const std::size_t n_jobs = result.plans.size() * result.seeds.size();
  std::vector<MetricsTrace> slots(n_jobs);
  parallel_for(n_jobs, [&](std::size_t job) {
    const auto& plan = result.plans[job / result.seeds.size()];
    const auto seed = result.seeds[job % result.seeds.size()];
    slots[job] = run_one(problem, c, plan, seed).trace;
  });
  for (std::size_t p = 0; p < result.plans.size(); ++p)
    for (std::size_t k = 0; k < result.seeds.size(); ++k)
      result.traces[result.plans[p].name].push_back(std::move(slots[p * result.seeds.size() + k]));

  if (result.seeds.size() >= 2) {
    double end = std::numeric_limits<double>::infinity();
    for (const auto& [name, runs] : result.traces)
      for (const auto& t : runs) end = std::min(end, static_cast<double>(t.rows.back().samples_consumed));
    if (c.budget > 0) end = std::min(end, static_cast<double>(c.budget));
    const auto grid = linear_grid(end, c.grid_points);
    std::vector<TraceMetric> metrics = {TraceMetric::min_grad_norm_sq, TraceMetric::grad_norm_sq,
                                        TraceMetric::tracking_error};
    if (c.mc_samples > 0) metrics.push_back(TraceMetric::mc_variance);
    for (auto m : metrics)
      for (const auto& [name, runs] : result.traces)
        result.bands[std::string(to_string(m))][name] = aggregate_bands(runs, m, grid);
  }
  return result;
}

inline nlohmann::json manifest_json(const ExperimentResult& r) {
  nlohmann::json plans = nlohmann::json::object();
  for (const auto& p : r.plans)
    plans[p.name] = {{"T", p.T}, {"samples_per_iter", p.samples_per_iter}, {"eval_every", p.eval_every}};
  return {{"config", config_to_json(r.config)},
          {"library_version", kVersion},
          {"seeds", r.seeds},
          {"plans", plans},
          {"lambda_min", r.lambda_min},
          {"warnings", r.warnings},
          {"variance_convention", kVarianceConvention},
          {"rng", "xoshiro256** seeded by SplitMix64; stream 0 stop index, 1 sampler, 2 Monte Carlo"}};
}

/// Writes manifest.json, traces/<algorithm>_seed<k>.csv, bands_<metric>.csv and SVG plots.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "traces");
  write_file_atomic(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
  for (const auto& [name, runs] : r.traces) {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      std::ostringstream csv;
      write_trace_csv(runs[k], csv);
      write_file_atomic(dir / "traces" / (name + "_seed" + std::to_string(r.seeds[k]) + ".csv"), csv.str());
    }
  }
  for (const auto& [metric, by_alg] : r.bands) {
    std::ostringstream csv;
    csv << kBandHeader << '\n';
    for (const auto& plan : r.plans) write_band_rows(plan.name, by_alg.at(plan.name), csv);
    const auto csv_path = dir / ("bands_" + metric + ".csv");
    write_file_atomic(csv_path, csv.str());
    if (r.config.plots) {
      PlotStyle style;
      style.title = r.config.name + ": " + metric;
      style.y_label = metric;
      plot(csv_path, dir / (metric + ".svg"), style);
    }
  }
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir) {
  auto result = run_experiment(c);
  write_experiment(result, dir);
  return result;
}

}  // namespace ggq
