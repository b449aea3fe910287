#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ggq/ggq.hpp"

namespace ggq::test {

/// Two states, one action, P(stay) = stay. Reward 0.
inline TabularMdp two_state_chain(double stay, double gamma = 0.9) {
  return {2, 1, {stay, 1.0 - stay, 1.0 - stay, stay}, std::vector<double>(4, 0.0), gamma};
}

/// One state with `na` self-looping actions paying `reward`.
inline TabularMdp one_state(std::size_t na, double reward, double gamma = 0.9) {
  return {1, na, std::vector<double>(na, 1.0), std::vector<double>(na, reward), gamma};
}

inline Problem garnet_problem(GarnetParams params, std::uint64_t seed, double sigma = 1.0,
                              double gamma = 0.95) {
  auto inst = generate_garnet(params, seed, gamma);
  BehaviorPolicy policy = uniform_behavior(inst.mdp);
  return {std::move(inst.mdp), std::move(policy), std::move(inst.features), SoftmaxSpec(sigma)};
}

/// Uniform draw from the ball of radius R in dimension n.
inline Vector in_ball(std::mt19937_64& gen, std::size_t n, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(gen);
  const double r = radius * std::pow(unif(gen), 1.0 / static_cast<double>(n));
  return v * (r / v.norm());
}

inline double l1(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().sum(); }

}  // namespace ggq::test
