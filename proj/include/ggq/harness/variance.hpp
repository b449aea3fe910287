#pragma once

#include <cstdint>
#include <stdexcept>

#include "ggq/problem.hpp"
#include "ggq/sampler.hpp"
#include "ggq/updates.hpp"

namespace ggq {

/**
 * Second moment of the stochastic slow-timescale direction around the
 * exact gradient, for an update that averages `batch` i.i.d. samples.
 *
 *   scaled  = E || -2 G_bar - grad J ||^2 = 4 E || G_bar + grad J / 2 ||^2
 *   literal = E || G_bar - grad J ||^2
 *
 * `scaled` treats -2 G_bar as the estimate of grad J, the sign and factor
 * under which E[G(theta, omega*)] = -grad J / 2. `literal` is the quantity
 * written with G used directly. Both include the squared bias from
 * omega != omega*(theta).
 */
struct UpdateVariance {
  double scaled = 0.0;
  double literal = 0.0;
};

inline constexpr const char* kVarianceConvention =
    "mc_variance = mean ||-2*Gbar - gradJ||^2 (= 4*mean||Gbar + gradJ/2||^2); "
    "mc_literal = mean ||Gbar - gradJ||^2; Gbar averages the algorithm's theta-update batch "
    "(vanilla 1, mini-batch B, nested-loop M) of i.i.d. draws from mu";

/// Monte Carlo estimate from `n_samples` batch means drawn from `sampler`.
inline UpdateVariance mc_variance(const Problem& problem, const Vector& theta, const Vector& omega,
                                  std::size_t n_samples, std::size_t batch, IidSampler& sampler) {
  if (n_samples < 1) throw std::invalid_argument("mc_variance: n_samples must be >= 1");
  if (batch < 1) throw std::invalid_argument("mc_variance: batch must be >= 1");
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  const Vector grad = problem.model().grad_objective(problem.softmax(), theta);
  UpdateVariance out;
  Vector mean_g(theta.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    mean_g.setZero();
    for (std::size_t j = 0; j < batch; ++j) mean_g += rule.g_direction(theta, omega, sampler.next());
    mean_g /= static_cast<double>(batch);
    out.scaled += (-2.0 * mean_g - grad).squaredNorm();
    out.literal += (mean_g - grad).squaredNorm();
  }
  out.scaled /= static_cast<double>(n_samples);
  out.literal /= static_cast<double>(n_samples);
  return out;
}

inline UpdateVariance mc_variance(const Problem& problem, const Vector& theta, const Vector& omega,
                                  std::size_t n_samples, std::uint64_t seed, std::size_t batch = 1) {
  IidSampler sampler(problem.tables(), seed, streams::kMonteCarlo);
  return mc_variance(problem, theta, omega, n_samples, batch, sampler);
}

/// Exact value of the quantity mc_variance estimates, by enumeration over (s, a, s').
inline UpdateVariance exact_update_variance(const Problem& problem, const Vector& theta,
                                            const Vector& omega, std::size_t batch = 1) {
  if (batch < 1) throw std::invalid_argument("exact_update_variance: batch must be >= 1");
  const GreedyGq rule(problem.features(), problem.softmax(), problem.gamma());
  const Vector grad = problem.model().grad_objective(problem.softmax(), theta);
  Vector mean = Vector::Zero(theta.size());
  double second = 0.0;
  problem.model().for_each_outcome([&](const Observation& obs, double w) {
    const Vector g = rule.g_direction(theta, omega, obs);
    mean += w * g;
    second += w * g.squaredNorm();
  });
  const double spread = (second - mean.squaredNorm()) / static_cast<double>(batch);
  UpdateVariance out;
  out.scaled = 4.0 * ((mean + 0.5 * grad).squaredNorm() + spread);
  out.literal = (mean - grad).squaredNorm() + spread;
  return out;
}

}  // namespace ggq
