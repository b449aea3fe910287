#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ggq/harness/variance.hpp"
#include "ggq/metrics.hpp"
#include "ggq/problem.hpp"
#include "ggq/rng.hpp"
#include "ggq/sampler.hpp"
#include "ggq/updates.hpp"

namespace ggq {

// ---------------------------------------------------------------------------
// Step sizes

enum class StepMode {
  constant,    ///< alpha0, beta0 throughout
  polynomial,  ///< alpha0 / T^a, beta0 / T^b, fixed for the whole run of horizon T
  decaying,    ///< alpha0 / (t+1)^a, beta0 / (t+1)^b
};

inline std::string_view to_string(StepMode mode) {
  switch (mode) {
    case StepMode::constant: return "constant";
    case StepMode::polynomial: return "polynomial";
    case StepMode::decaying: return "decaying";
  }
  return "constant";
}

inline StepMode parse_step_mode(std::string_view name) {
  if (name == "constant") return StepMode::constant;
  if (name == "polynomial") return StepMode::polynomial;
  if (name == "decaying") return StepMode::decaying;
  throw std::invalid_argument("unknown step schedule '" + std::string(name) + "'");
}

struct StepParams {
  double alpha0 = 0.1;
  double beta0 = 0.5;
  double a = 0.5;
  double b = 0.5;
};

class StepSchedule {
 public:
  StepSchedule(StepMode mode, StepParams params, std::uint64_t horizon)
      : mode_(mode), params_(params), horizon_(horizon) {
    if (!(params.alpha0 >= 0.0) || !(params.beta0 >= 0.0) || !std::isfinite(params.alpha0) ||
        !std::isfinite(params.beta0))
      throw std::invalid_argument("step schedule: alpha0 and beta0 must be finite and non-negative");
    if (mode != StepMode::constant) {
      if (!(params.a >= 0.5 && params.a <= 1.0))
        throw std::invalid_argument("step schedule: exponent a must lie in [1/2, 1]");
      if (!(params.b > 0.0 && params.b <= params.a))
        throw std::invalid_argument("step schedule: exponent b must lie in (0, a]");
      if (horizon == 0) throw std::invalid_argument("step schedule: horizon must be positive");
    }
  }

  double alpha(std::uint64_t t) const { return scaled(params_.alpha0, params_.a, t); }
  double beta(std::uint64_t t) const { return scaled(params_.beta0, params_.b, t); }

  StepMode mode() const noexcept { return mode_; }
  const StepParams& params() const noexcept { return params_; }
  std::uint64_t horizon() const noexcept { return horizon_; }

 private:
  double scaled(double base, double exponent, std::uint64_t t) const {
    switch (mode_) {
      case StepMode::constant: return base;
      case StepMode::polynomial: return base / std::pow(static_cast<double>(horizon_), exponent);
      case StepMode::decaying: return base / std::pow(static_cast<double>(t + 1), exponent);
    }
    return base;
  }

  StepMode mode_;
  StepParams params_;
  std::uint64_t horizon_;
};

inline StepSchedule make_schedule(StepMode mode, StepParams params, std::uint64_t horizon) {
  return {mode, params, horizon};
}

// ---------------------------------------------------------------------------
// Run configuration and results

struct RunOptions {
  SamplerKind sampler = SamplerKind::iid;
  std::uint64_t T = 1000;         ///< iterations (outer iterations for nested-loop)
  double radius = 100.0;
  std::uint64_t seed = 0;
  std::uint64_t eval_every = 1;   ///< iterations between trace rows
  bool final_iterate = false;     ///< run all T iterations instead of stopping at W
  std::size_t mc_samples = 0;     ///< Monte Carlo batches per trace row; 0 disables
  bool record_trace = true;       ///< false skips all oracle evaluation; the trace stays empty
  std::optional<Vector> theta0;
  std::optional<Vector> omega0;
};

struct RunResult {
  Vector theta;              ///< theta_W (theta_T with final_iterate)
  std::uint64_t stop_index = 0;
  LearnerState final_state;
  MetricsTrace trace;
  std::uint64_t samples_consumed = 0;
};

struct NestedConfig {
  std::uint64_t T = 1000;
  std::uint64_t T_c = 10;
  std::uint64_t B = 5;
  std::uint64_t M = 30;
  double alpha = 0.1;
  double beta = 0.5;

  void validate() const {
    if (T < 1) throw std::invalid_argument("nested config: T must be >= 1");
    if (B < 1 || M < 1) throw std::invalid_argument("nested config: B and M must be >= 1");
    if (!(alpha >= 0.0) || !(beta >= 0.0))
      throw std::invalid_argument("nested config: step sizes must be non-negative");
  }

  std::uint64_t samples_per_outer() const noexcept { return B * T_c + M; }
};

/// Step-size conditions alpha < 1/K and beta < lambda/4 that the nested-loop bound assumes.
inline std::vector<std::string> nested_step_warnings(const NestedConfig& cfg, double K, double lambda) {
  std::vector<std::string> out;
  if (!(cfg.alpha < 1.0 / K))
    out.push_back("alpha = " + format_real(cfg.alpha) + " is not below 1/K = " + format_real(1.0 / K));
  if (!(cfg.beta < lambda / 4.0))
    out.push_back("beta = " + format_real(cfg.beta) + " is not below lambda/4 = " + format_real(lambda / 4.0));
  return out;
}

namespace detail {

inline LearnerState initial_state(const Problem& problem, const RunOptions& opts) {
  auto state = LearnerState::zeros(problem.n_features(), opts.radius);
  if (opts.theta0) state.theta = project(*opts.theta0, opts.radius);
  if (opts.omega0) state.omega = project(*opts.omega0, opts.radius);
  return state;
}

inline std::uint64_t stop_index(const RunOptions& opts) {
  if (opts.T < 1) throw std::invalid_argument("run: T must be >= 1");
  if (opts.final_iterate) return opts.T;
  Rng rng(opts.seed, streams::kStopIndex);
  return rng.below(opts.T);
}

/// Oracle observer. Owns its own RNG stream so it never perturbs the run.
class TraceRecorder {
 public:
  TraceRecorder(const Problem& problem, const RunOptions& opts, std::size_t update_batch)
      : problem_(problem),
        enabled_(opts.record_trace),
        eval_every_(opts.eval_every == 0 ? 1 : opts.eval_every),
        mc_samples_(opts.mc_samples),
        batch_(update_batch),
        mc_sampler_(problem.tables(), opts.seed, streams::kMonteCarlo) {}

  bool due(std::uint64_t iter, std::uint64_t last) const {
    return iter % eval_every_ == 0 || iter == last;
  }

  /// Called after every update. The running minimum covers every iterate, not only recorded rows.
  void observe(std::uint64_t iter, std::uint64_t last, std::uint64_t samples, const LearnerState& state) {
    if (!enabled_) return;
    if (due(iter, last)) {
      record(iter, samples, state);
      return;
    }
    const double g = problem_.model().grad_objective(problem_.softmax(), state.theta).squaredNorm();
    running_min_ = std::min(running_min_, g);
  }

  void record(std::uint64_t iter, std::uint64_t samples, const LearnerState& state) {
    if (!enabled_) return;
    const OracleEval eval = problem_.model().evaluate(problem_.softmax(), state.theta);
    TraceRow row;
    row.iter = iter;
    row.samples_consumed = samples;
    row.grad_norm_sq = eval.gradient.squaredNorm();
    running_min_ = std::min(running_min_, row.grad_norm_sq);
    row.min_grad_norm_sq = running_min_;
    row.tracking_error = (state.omega - eval.omega_star).norm();
    if (mc_samples_ > 0) {
      const auto v = mc_variance(problem_, state.theta, state.omega, mc_samples_, batch_, mc_sampler_);
      row.mc_variance = v.scaled;
      row.mc_literal = v.literal;
    }
    trace_.rows.push_back(row);
  }

  MetricsTrace take() { return std::move(trace_); }

 private:
  const Problem& problem_;
  bool enabled_;
  std::uint64_t eval_every_;
  std::size_t mc_samples_;
  std::size_t batch_;
  IidSampler mc_sampler_;
  MetricsTrace trace_;
  double running_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Algorithms

/// Vanilla two-timescale Greedy-GQ with random stopping index W ~ U{0..T-1}.
inline RunResult run_vanilla(const Problem& problem, const StepSchedule& schedule,
                             const RunOptions& opts) {
  const std::uint64_t stop = detail::stop_index(opts);
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  Sampler sampler(opts.sampler, problem.tables(), opts.seed);
  detail::TraceRecorder recorder(problem, opts, 1);

  LearnerState state = detail::initial_state(problem, opts);
  recorder.record(0, 0, state);
  for (std::uint64_t t = 0; t < stop; ++t) {
    state = vanilla_step(rule, state, sampler.next(), schedule.alpha(t), schedule.beta(t));
    recorder.observe(t + 1, stop, sampler.consumed(), state);
  }
  return {state.theta, stop, state, recorder.take(), sampler.consumed()};
}

/**
 * Mini-batch Greedy-GQ: each iteration draws B fresh samples and updates
 * omega and theta simultaneously with the batch means of H and G at
 * (theta_t, omega_t). With B = 1 this is exactly run_vanilla.
 */
inline RunResult run_minibatch(const Problem& problem, const StepSchedule& schedule,
                               std::uint64_t batch, const RunOptions& opts) {
  if (batch < 1) throw std::invalid_argument("run_minibatch: B must be >= 1");
  const std::uint64_t stop = detail::stop_index(opts);
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  Sampler sampler(opts.sampler, problem.tables(), opts.seed);
  detail::TraceRecorder recorder(problem, opts, batch);
  const auto batch_size = static_cast<double>(batch);

  LearnerState state = detail::initial_state(problem, opts);
  recorder.record(0, 0, state);
  Vector sum_g, sum_h;
  for (std::uint64_t t = 0; t < stop; ++t) {
    for (std::uint64_t i = 0; i < batch; ++i) {
      auto d = rule.directions(state.theta, state.omega, sampler.next());
      if (i == 0) {
        sum_g = std::move(d.g);
        sum_h = std::move(d.h);
      } else {
        sum_g += d.g;
        sum_h += d.h;
      }
    }
    const double alpha = schedule.alpha(t) / batch_size;
    const double beta = schedule.beta(t) / batch_size;
    Vector theta = project(state.theta + alpha * sum_g, state.radius);
    state.omega = project(state.omega + beta * sum_h, state.radius);
    state.theta = std::move(theta);
    recorder.observe(t + 1, stop, sampler.consumed(), state);
  }
  return {state.theta, stop, state, recorder.take(), sampler.consumed()};
}

/**
 * Nested-loop Greedy-GQ. For each outer step t < W:
 *   - T_c inner updates of omega at frozen theta_t, each averaging H over B
 *     fresh samples; omega after the last inner update becomes w_{t+1};
 *   - one update of theta averaging G(theta_t, w_t) over M fresh samples,
 *     where w_t is omega at the start of the outer step.
 * Every outer step consumes B * T_c + M samples.
 */
inline RunResult run_nested_loop(const Problem& problem, const NestedConfig& cfg,
                                 const RunOptions& opts) {
  cfg.validate();
  RunOptions run = opts;
  run.T = cfg.T;
  const std::uint64_t stop = detail::stop_index(run);
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  Sampler sampler(run.sampler, problem.tables(), run.seed);
  detail::TraceRecorder recorder(problem, run, cfg.M);
  const double inner_step = cfg.beta / static_cast<double>(cfg.B);
  const double outer_step = cfg.alpha / static_cast<double>(cfg.M);

  LearnerState state = detail::initial_state(problem, run);
  recorder.record(0, 0, state);
  Vector sum(static_cast<Eigen::Index>(problem.n_features()));
  for (std::uint64_t t = 0; t < stop; ++t) {
    const Vector w_start = state.omega;
    Vector w = state.omega;
    for (std::uint64_t tc = 0; tc < cfg.T_c; ++tc) {
      sum.setZero();
      for (std::uint64_t i = 0; i < cfg.B; ++i) sum += rule.h_direction(state.theta, w, sampler.next());
      w = project(w + inner_step * sum, state.radius);
    }
    sum.setZero();
    for (std::uint64_t i = 0; i < cfg.M; ++i) sum += rule.g_direction(state.theta, w_start, sampler.next());
    state.theta = project(state.theta + outer_step * sum, state.radius);
    state.omega = std::move(w);
    recorder.observe(t + 1, stop, sampler.consumed(), state);
  }
  return {state.theta, stop, state, recorder.take(), sampler.consumed()};
}

/**
 * Inner loop of the nested-loop method in isolation: T_c averaged-H updates
 * of omega at a frozen theta. Returns omega after the last update.
 */
inline Vector run_inner_loop(const Problem& problem, const Vector& theta, Vector omega,
                             std::uint64_t inner_iters, std::uint64_t batch, double beta,
                             double radius, SamplerKind kind, std::uint64_t seed) {
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  Sampler sampler(kind, problem.tables(), seed);
  const double step = beta / static_cast<double>(batch);
  Vector sum(omega.size());
  for (std::uint64_t tc = 0; tc < inner_iters; ++tc) {
    sum.setZero();
    for (std::uint64_t i = 0; i < batch; ++i) sum += rule.h_direction(theta, omega, sampler.next());
    omega = project(omega + step * sum, radius);
  }
  return omega;
}

}  // namespace ggq
