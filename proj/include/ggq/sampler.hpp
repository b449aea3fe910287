#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "ggq/mdp.hpp"
#include "ggq/rng.hpp"

namespace ggq {

enum class SamplerKind { iid, markov };

inline std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::iid ? "iid" : "markov";
}

inline SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "iid") return SamplerKind::iid;
  if (name == "markov") return SamplerKind::markov;
  throw std::invalid_argument("unknown sampler kind '" + std::string(name) + "'");
}

/// Draws an index from a cumulative table; the last entry is treated as 1.
inline std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf.begin());
  return std::min(idx, cdf.size() - 1);
}

/**
 * Cumulative tables for sampling the behavior chain (after restart
 * rewiring). Built once per problem and shared read-only between samplers.
 */
class SamplingTables {
 public:
  SamplingTables(const TabularMdp& mdp, const BehaviorPolicy& policy)
      : chain_(continualized(mdp)) {
    const auto stationary = stationary_distribution(mdp, policy);
    const std::size_t ns = chain_.n_states();
    const std::size_t na = chain_.n_actions();
    state_cdf_ = cumulative(stationary.states.data(), ns);
    pair_cdf_ = cumulative(stationary.pairs.data(), ns * na);
    action_cdf_.resize(ns);
    for (StateId s = 0; s < ns; ++s) {
      std::vector<double> probs(na);
      for (ActionId a = 0; a < na; ++a) probs[a] = policy(s, a);
      action_cdf_[s] = cumulative(probs.data(), na);
    }
    next_cdf_.resize(ns * na);
    for (StateId s = 0; s < ns; ++s)
      for (ActionId a = 0; a < na; ++a)
        next_cdf_[s * na + a] = cumulative(chain_.transition_row(s, a).data(), ns);
  }

  const TabularMdp& chain() const noexcept { return chain_; }

  StateId draw_state(Rng& rng) const { return draw_from_cdf(state_cdf_, rng.uniform01()); }
  ActionId draw_action(StateId s, Rng& rng) const {
    return draw_from_cdf(action_cdf_[s], rng.uniform01());
  }
  std::size_t draw_pair(Rng& rng) const { return draw_from_cdf(pair_cdf_, rng.uniform01()); }
  StateId draw_next(StateId s, ActionId a, Rng& rng) const {
    return draw_from_cdf(next_cdf_[s * chain_.n_actions() + a], rng.uniform01());
  }

 private:
  static std::vector<double> cumulative(const double* p, std::size_t n) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += p[i];
      cdf[i] = acc;
    }
    // Trailing zero-probability entries must never be selected.
    std::size_t last = n;
    while (last > 0 && p[last - 1] == 0.0) --last;
    for (std::size_t i = last; i < n; ++i) cdf[i] = 2.0;
    if (last > 0) cdf[last - 1] = 1.0;
    return cdf;
  }

  TabularMdp chain_;
  std::vector<double> state_cdf_;
  std::vector<double> pair_cdf_;
  std::vector<std::vector<double>> action_cdf_;
  std::vector<std::vector<double>> next_cdf_;
};

/// Follows the behavior policy along one trajectory.
class MarkovSampler {
 public:
  enum class Start { stationary, fixed };

  MarkovSampler(std::shared_ptr<const SamplingTables> tables, std::uint64_t seed,
                Start start = Start::stationary, StateId s0 = 0)
      : tables_(std::move(tables)), rng_(seed, streams::kSampler) {
    state_ = start == Start::stationary ? tables_->draw_state(rng_) : s0;
    if (state_ >= tables_->chain().n_states())
      throw std::invalid_argument("MarkovSampler: start state out of range");
  }

  Observation next() {
    Observation obs;
    obs.s = state_;
    obs.a = tables_->draw_action(state_, rng_);
    obs.s_next = tables_->draw_next(obs.s, obs.a, rng_);
    obs.r = tables_->chain().r(obs.s, obs.a, obs.s_next);
    state_ = obs.s_next;
    return obs;
  }

  StateId state() const noexcept { return state_; }

 private:
  std::shared_ptr<const SamplingTables> tables_;
  Rng rng_;
  StateId state_ = 0;
};

/// Independent draws (s, a) ~ mu followed by s' ~ P(.|s, a).
class IidSampler {
 public:
  IidSampler(std::shared_ptr<const SamplingTables> tables, std::uint64_t seed,
             std::uint64_t stream = streams::kSampler)
      : tables_(std::move(tables)), rng_(seed, stream) {}

  Observation next() {
    const std::size_t pair = tables_->draw_pair(rng_);
    const std::size_t na = tables_->chain().n_actions();
    Observation obs;
    obs.s = pair / na;
    obs.a = pair % na;
    obs.s_next = tables_->draw_next(obs.s, obs.a, rng_);
    obs.r = tables_->chain().r(obs.s, obs.a, obs.s_next);
    return obs;
  }

 private:
  std::shared_ptr<const SamplingTables> tables_;
  Rng rng_;
};

/// Either sampler behind one interface. Owns its RNG; not shareable.
class Sampler {
 public:
  Sampler(SamplerKind kind, std::shared_ptr<const SamplingTables> tables, std::uint64_t seed)
      : impl_(make(kind, std::move(tables), seed)) {}

  Observation next() {
    ++consumed_;
    return std::visit([](auto& s) { return s.next(); }, impl_);
  }

  std::uint64_t consumed() const noexcept { return consumed_; }

 private:
  using Impl = std::variant<IidSampler, MarkovSampler>;
  static Impl make(SamplerKind kind, std::shared_ptr<const SamplingTables> tables,
                   std::uint64_t seed) {
    if (kind == SamplerKind::iid) return IidSampler(std::move(tables), seed);
    return MarkovSampler(std::move(tables), seed);
  }

  Impl impl_;
  std::uint64_t consumed_ = 0;
};

}  // namespace ggq
