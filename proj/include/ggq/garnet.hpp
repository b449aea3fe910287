#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggq/features.hpp"
#include "ggq/mdp.hpp"
#include "ggq/rng.hpp"

namespace ggq {

struct GarnetParams {
  std::size_t n_states = 10;
  std::size_t n_actions = 5;
  std::size_t branching = 10;
  std::size_t n_features = 5;
};

struct GarnetInstance {
  TabularMdp mdp;
  FeatureMap features;
  std::vector<std::string> warnings;
};

/**
 * Garnet G(|S|, |A|, b, N).
 *
 * Each (s, a) gets `branching` distinct successors drawn uniformly without
 * replacement, with U(0,1) weights normalized to one. Rewards are U(0,1) per
 * (s, a) and do not depend on the successor. Features come from
 * random_features with the same seed. Transitions, rewards and features use
 * separate RNG streams of `seed`.
 */
inline GarnetInstance generate_garnet(const GarnetParams& params, std::uint64_t seed,
                                      double gamma = 0.95) {
  const std::size_t ns = params.n_states;
  const std::size_t na = params.n_actions;
  if (ns == 0 || na == 0) throw std::invalid_argument("garnet: state and action counts must be positive");
  if (params.branching < 1 || params.branching > ns)
    throw std::invalid_argument("garnet: branching factor must lie in [1, n_states]");

  Rng trans_rng(seed, streams::kTransitions);
  Rng reward_rng(seed, streams::kRewards);
  std::vector<double> p(ns * na * ns, 0.0);
  std::vector<double> r(ns * na * ns, 0.0);
  std::vector<StateId> pool(ns);

  for (StateId s = 0; s < ns; ++s) {
    for (ActionId a = 0; a < na; ++a) {
      std::iota(pool.begin(), pool.end(), StateId{0});
      for (std::size_t k = 0; k < params.branching; ++k) {
        const auto j = k + static_cast<std::size_t>(trans_rng.below(ns - k));
        std::swap(pool[k], pool[j]);
      }
      std::vector<double> weights(params.branching);
      double total = 0.0;
      for (double& w : weights) {
        do {
          w = trans_rng.uniform01();
        } while (w == 0.0);
        total += w;
      }
      const std::size_t row = (s * na + a) * ns;
      double assigned = 0.0;
      for (std::size_t k = 0; k + 1 < params.branching; ++k) {
        p[row + pool[k]] = weights[k] / total;
        assigned += p[row + pool[k]];
      }
      p[row + pool[params.branching - 1]] = 1.0 - assigned;

      const double reward = reward_rng.uniform01();
      std::fill_n(r.begin() + static_cast<std::ptrdiff_t>(row), ns, reward);
    }
  }

  GarnetInstance out{
      TabularMdp(ns, na, std::move(p), std::move(r), gamma,
                 "garnet(" + std::to_string(ns) + "," + std::to_string(na) + "," +
                     std::to_string(params.branching) + "," + std::to_string(params.n_features) + ")"),
      random_features(params.n_features, ns, na, seed),
      {}};
  if (params.n_features >= ns * na)
    out.warnings.push_back("n_features >= |S||A|: the linear approximation is exact");
  return out;
}

}  // namespace ggq
