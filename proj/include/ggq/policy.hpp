#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "ggq/features.hpp"
#include "ggq/mdp.hpp"

namespace ggq {

/// Softmax target policy pi_theta(a|s) proportional to exp(sigma * theta^T phi_{s,a}).
class SoftmaxSpec {
 public:
  explicit SoftmaxSpec(double sigma = 1.0) : sigma_(sigma) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_))
      throw std::invalid_argument("SoftmaxSpec: sigma must be a positive finite number");
  }
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

inline Vector softmax(const Vector& logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

inline Vector target_policy(const SoftmaxSpec& spec, const FeatureMap& features,
                            const Vector& theta, StateId s) {
  const Vector q = features.state_block(s).transpose() * theta;
  return softmax(spec.sigma() * q);
}

/// Gradient of pi_theta(a|s) w.r.t. theta: sigma * pi(a|s) * (phi_{s,a} - sum_b pi(b|s) phi_{s,b}).
inline Vector softmax_gradient(const SoftmaxSpec& spec, const FeatureMap& features,
                               const Vector& theta, StateId s, ActionId a) {
  const Vector pi = target_policy(spec, features, theta, s);
  const Vector mean_phi = features.state_block(s) * pi;
  return spec.sigma() * pi(static_cast<Eigen::Index>(a)) * (features.phi(s, a) - mean_phi);
}

/// V-bar and its gradient at one successor state, evaluated together.
struct NextStateTerms {
  double vbar = 0.0;
  Vector grad;  ///< phi-hat_{s'}(theta)
};

/**
 * vbar = sum_a pi(a|s') q_a with q_a = theta^T phi_{s',a}.
 * grad = sum_a pi_a phi_a + sum_a q_a grad pi_a, which collapses to
 * Phi_{s'} (pi + sigma * pi .* (q - vbar)).
 */
inline NextStateTerms next_state_terms(const SoftmaxSpec& spec, const FeatureMap& features,
                                       const Vector& theta, StateId s_next) {
  const auto block = features.state_block(s_next);
  const Vector q = block.transpose() * theta;
  const Vector pi = softmax(spec.sigma() * q);
  NextStateTerms out;
  out.vbar = pi.dot(q);
  const Vector weights =
      pi.array() + spec.sigma() * pi.array() * (q.array() - out.vbar);
  out.grad = block * weights;
  return out;
}

inline double vbar(const SoftmaxSpec& spec, const FeatureMap& features, const Vector& theta,
                   StateId s_next) {
  const Vector q = features.state_block(s_next).transpose() * theta;
  return softmax(spec.sigma() * q).dot(q);
}

inline Vector grad_vbar(const SoftmaxSpec& spec, const FeatureMap& features, const Vector& theta,
                        StateId s_next) {
  return next_state_terms(spec, features, theta, s_next).grad;
}

/// Reference constants of the smoothness analysis, evaluated for a concrete problem.
struct LipschitzConstants {
  double k1 = 0;          ///< softmax Lipschitz constant, 2 sigma
  double k2 = 0;          ///< softmax smoothness constant, 8 sigma^2
  double K = 0;           ///< smoothness of J on the R-ball
  double k3 = 0;          ///< Lipschitz constant of theta -> G(theta, omega*(theta))
  double w_star_lip = 0;  ///< Lipschitz constant of omega*
  double g_omega_lip = 0; ///< Lipschitz constant of omega -> G(theta, omega)
};

inline LipschitzConstants lipschitz_constants(const SoftmaxSpec& spec, double gamma,
                                              std::size_t n_actions, double r_max, double radius,
                                              double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lipschitz_constants: lambda must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("lipschitz_constants: radius must be positive");
  const double sigma = spec.sigma();
  const double na = static_cast<double>(n_actions);
  const double R = radius;
  LipschitzConstants c;
  c.k1 = 2.0 * sigma;
  c.k2 = 8.0 * sigma * sigma;
  const double v_lip = 1.0 + gamma + gamma * R * na * c.k1;   // Lipschitz constant of E[delta phi]
  const double v_bound = r_max + R + gamma * R;               // bound on E[delta phi]
  const double dphi_lip = na * (2.0 * c.k1 + c.k2 * R);        // Lipschitz constant of phi-hat
  const double phi_hat_bound = na * R * c.k1 + 1.0;
  c.K = 2.0 * gamma / lambda * (phi_hat_bound * v_lip + na * v_bound * (2.0 * c.k1 + c.k2 * R));
  c.k3 = v_lip + gamma / lambda * dphi_lip * v_bound + gamma / lambda * phi_hat_bound * v_lip;
  c.w_star_lip = v_lip / lambda;
  c.g_omega_lip = gamma * phi_hat_bound;
  return c;
}

inline LipschitzConstants lipschitz_constants(const SoftmaxSpec& spec, const TabularMdp& mdp,
                                              double radius, double lambda) {
  return lipschitz_constants(spec, mdp.discount(), mdp.n_actions(), mdp.r_max(), radius, lambda);
}

}  // namespace ggq
