#pragma once

#include <memory>

#include "ggq/features.hpp"
#include "ggq/mdp.hpp"
#include "ggq/oracle.hpp"
#include "ggq/policy.hpp"
#include "ggq/sampler.hpp"

namespace ggq {

/**
 * One learning problem: MDP, behavior policy, features and target-policy
 * temperature, plus the derived exact model and sampling tables. Immutable
 * after construction and shared read-only by concurrent runs.
 */
class Problem {
 public:
  Problem(TabularMdp mdp, BehaviorPolicy policy, FeatureMap features, SoftmaxSpec softmax)
      : mdp_(std::move(mdp)),
        policy_(std::move(policy)),
        features_(std::move(features)),
        softmax_(softmax),
        model_(std::make_shared<const ExactModel>(mdp_, policy_, features_)),
        tables_(std::make_shared<const SamplingTables>(mdp_, policy_)) {}

  const TabularMdp& mdp() const noexcept { return mdp_; }
  const BehaviorPolicy& policy() const noexcept { return policy_; }
  const FeatureMap& features() const noexcept { return features_; }
  const SoftmaxSpec& softmax() const noexcept { return softmax_; }
  const ExactModel& model() const noexcept { return *model_; }
  std::shared_ptr<const SamplingTables> tables() const noexcept { return tables_; }
  double gamma() const noexcept { return mdp_.discount(); }
  std::size_t n_features() const noexcept { return features_.n_features(); }

  LipschitzConstants constants(double radius) const {
    return lipschitz_constants(softmax_, mdp_, radius, model_->lambda_min());
  }

 private:
  TabularMdp mdp_;
  BehaviorPolicy policy_;
  FeatureMap features_;
  SoftmaxSpec softmax_;
  std::shared_ptr<const ExactModel> model_;
  std::shared_ptr<const SamplingTables> tables_;
};

}  // namespace ggq
