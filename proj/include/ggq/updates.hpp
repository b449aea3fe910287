#pragma once

#include <cmath>
#include <stdexcept>

#include "ggq/features.hpp"
#include "ggq/mdp.hpp"
#include "ggq/policy.hpp"

namespace ggq {

/// Euclidean projection onto the ball of radius R.
inline Vector project(const Vector& v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project: radius must be positive");
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

/// Slow weights theta, fast weights omega, and the projection radius shared by both.
struct LearnerState {
  Vector theta;
  Vector omega;
  double radius = 100.0;

  static LearnerState zeros(std::size_t n_features, double radius) {
    const auto n = static_cast<Eigen::Index>(n_features);
    return {Vector::Zero(n), Vector::Zero(n), radius};
  }

  bool within_radius(double slack = 1e-12) const {
    return theta.norm() <= radius + slack && omega.norm() <= radius + slack;
  }
};

/**
 * Per-sample quantities of Greedy-GQ for a fixed feature map, softmax
 * temperature and discount:
 *
 *   delta = r + gamma Vbar_{s'}(theta) - theta^T phi
 *   G     = delta phi - gamma (omega^T phi) phi-hat_{s'}(theta)
 *   H     = (delta - phi^T omega) phi
 */
class GreedyGq {
 public:
  GreedyGq(const FeatureMap& features, SoftmaxSpec softmax, double gamma)
      : features_(&features), softmax_(softmax), gamma_(gamma) {}

  struct Directions {
    double delta = 0.0;
    Vector g;
    Vector h;
  };

  double td_error(const Vector& theta, const Observation& obs) const {
    return obs.r + gamma_ * vbar(softmax_, *features_, theta, obs.s_next) -
           features_->phi(obs.s, obs.a).dot(theta);
  }

  Directions directions(const Vector& theta, const Vector& omega, const Observation& obs) const {
    const auto phi = features_->phi(obs.s, obs.a);
    const NextStateTerms next = next_state_terms(softmax_, *features_, theta, obs.s_next);
    Directions d;
    d.delta = obs.r + gamma_ * next.vbar - phi.dot(theta);
    const double phi_omega = phi.dot(omega);
    d.g = d.delta * phi - (gamma_ * phi_omega) * next.grad;
    d.h = (d.delta - phi_omega) * phi;
    return d;
  }

  Vector g_direction(const Vector& theta, const Vector& omega, const Observation& obs) const {
    return directions(theta, omega, obs).g;
  }

  Vector h_direction(const Vector& theta, const Vector& omega, const Observation& obs) const {
    const auto phi = features_->phi(obs.s, obs.a);
    return (td_error(theta, obs) - phi.dot(omega)) * phi;
  }

  const FeatureMap& features() const noexcept { return *features_; }
  const SoftmaxSpec& softmax() const noexcept { return softmax_; }
  double gamma() const noexcept { return gamma_; }

 private:
  const FeatureMap* features_;
  SoftmaxSpec softmax_;
  double gamma_;
};

/// One simultaneous two-timescale step; both updates read the pre-step theta.
inline LearnerState vanilla_step(const GreedyGq& rule, const LearnerState& state,
                                 const Observation& obs, double alpha, double beta) {
  const auto d = rule.directions(state.theta, state.omega, obs);
  LearnerState next;
  next.radius = state.radius;
  next.theta = project(state.theta + alpha * d.g, state.radius);
  next.omega = project(state.omega + beta * d.h, state.radius);
  return next;
}

}  // namespace ggq
