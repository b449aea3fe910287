#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggq/algorithms.hpp"
#include "ggq/harness/experiment.hpp"
#include "ggq/harness/rates.hpp"

namespace ggq {

/// Horizon sweep with horizon-indexed steps alpha = alpha0 / T^a, beta = beta0 / T^b.
struct RateSweepConfig {
  std::string algorithm = "vanilla";
  std::vector<std::uint64_t> horizons = {1000, 3000, 10000, 30000};
  std::uint64_t n_seeds = 40;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::iid;
  StepParams steps{1.0, 1.0, 0.5, 0.5};
  double radius = 100.0;
  std::uint64_t minibatch_B = 30;
  std::uint64_t T_c = 10;
  std::uint64_t B = 5;
  std::uint64_t M = 30;
};

struct RatePoint {
  std::uint64_t T = 0;
  double mean_grad_norm_sq = 0.0;
};

struct RateSweepResult {
  std::vector<RatePoint> points;
  RateFit fit;
};

/// Mean over seeds of ||grad J(theta_W)||^2 per horizon, and the log-log slope.
inline RateSweepResult run_rate_sweep(const Problem& problem, const RateSweepConfig& cfg) {
  if (cfg.algorithm != "vanilla" && cfg.algorithm != "minibatch" && cfg.algorithm != "nested")
    throw std::invalid_argument("rate sweep: unknown algorithm '" + cfg.algorithm + "'");
  if (cfg.n_seeds < 1) throw std::invalid_argument("rate sweep: n_seeds must be >= 1");
  const std::size_t per_horizon = cfg.n_seeds;
  std::vector<double> grad(cfg.horizons.size() * per_horizon);
  parallel_for(grad.size(), [&](std::size_t job) {
    const std::uint64_t T = cfg.horizons[job / per_horizon];
    RunOptions opts;
    opts.sampler = cfg.sampler;
    opts.T = T;
    opts.radius = cfg.radius;
    opts.seed = cfg.seed + job % per_horizon;
    opts.record_trace = false;
    const StepSchedule schedule(StepMode::polynomial, cfg.steps, T);
    RunResult run;
    if (cfg.algorithm == "vanilla") {
      run = run_vanilla(problem, schedule, opts);
    } else if (cfg.algorithm == "minibatch") {
      run = run_minibatch(problem, schedule, cfg.minibatch_B, opts);
    } else {
      run = run_nested_loop(problem, {T, cfg.T_c, cfg.B, cfg.M, schedule.alpha(0), schedule.beta(0)}, opts);
    }
    grad[job] = problem.model().grad_objective(problem.softmax(), run.theta).squaredNorm();
  });

  RateSweepResult out;
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    double sum = 0.0;
    for (std::size_t k = 0; k < per_horizon; ++k) sum += grad[h * per_horizon + k];
    const double mean = sum / static_cast<double>(per_horizon);
    out.points.push_back({cfg.horizons[h], mean});
    fit_points.emplace_back(static_cast<double>(cfg.horizons[h]), mean);
  }
  out.fit = rate_fit(fit_points);
  return out;
}

}  // namespace ggq
