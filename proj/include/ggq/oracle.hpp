#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "ggq/errors.hpp"
#include "ggq/features.hpp"
#include "ggq/mdp.hpp"
#include "ggq/policy.hpp"

namespace ggq {

/// C = sum_{s,a} mu(s,a) phi_{s,a} phi_{s,a}^T.
inline Matrix feature_covariance(const FeatureMap& features, const Vector& pair_weights) {
  const Matrix& phi = features.table();
  return phi * pair_weights.asDiagonal() * phi.transpose();
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

inline constexpr double kSingularThreshold = 1e-10;

/// Everything the exact evaluation of J(theta) needs at one theta.
struct OracleEval {
  Vector td_vector;   ///< E_mu[delta phi]
  Vector omega_star;  ///< C^{-1} E_mu[delta phi]
  double objective = 0.0;
  Vector gradient;    ///< grad J (not J / 2)
};

/**
 * Exact model of one (MDP, behavior policy, features) triple.
 *
 * Holds the restart-rewired chain, mu over (s, a), the covariance C, its
 * smallest eigenvalue and a Cholesky factorization. All expectations are
 * sums over (s, a, s') with weights mu(s,a) P(s'|s,a).
 */
class ExactModel {
 public:
  struct Successor {
    StateId next;
    double prob;
    double reward;
  };

  ExactModel(const TabularMdp& mdp, const BehaviorPolicy& policy, const FeatureMap& features)
      : chain_(continualized(mdp)), features_(features) {
    if (features_.n_states() != chain_.n_states() || features_.n_actions() != chain_.n_actions())
      throw std::invalid_argument("ExactModel: feature map shape does not match the MDP");
    const auto stationary = stationary_distribution(mdp, policy);
    mu_ = stationary.pairs;
    nu_ = stationary.states;
    cov_ = feature_covariance(features_, mu_);
    cov_ = 0.5 * (cov_ + cov_.transpose());
    lambda_min_ = min_eigenvalue(cov_);
    if (!(lambda_min_ > kSingularThreshold)) {
      std::ostringstream msg;
      msg << "feature covariance is singular: smallest eigenvalue " << lambda_min_
          << " <= " << kSingularThreshold;
      throw AssumptionViolated(msg.str(), lambda_min_);
    }
    llt_.compute(cov_);

    const std::size_t ns = chain_.n_states();
    const std::size_t na = chain_.n_actions();
    successors_.resize(ns * na);
    for (StateId s = 0; s < ns; ++s) {
      for (ActionId a = 0; a < na; ++a) {
        for (StateId n = 0; n < ns; ++n) {
          const double p = chain_.p(s, a, n);
          if (p > 0.0) successors_[s * na + a].push_back({n, p, chain_.r(s, a, n)});
        }
      }
    }
  }

  const TabularMdp& chain() const noexcept { return chain_; }
  const FeatureMap& features() const noexcept { return features_; }
  const Vector& mu() const noexcept { return mu_; }
  const Vector& nu() const noexcept { return nu_; }
  const Matrix& covariance() const noexcept { return cov_; }
  double lambda_min() const noexcept { return lambda_min_; }
  double gamma() const noexcept { return chain_.discount(); }
  const std::vector<Successor>& successors(StateId s, ActionId a) const {
    return successors_[s * chain_.n_actions() + a];
  }

  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }

  /// Calls f(obs, weight) for every (s, a, s') with positive probability.
  template <typename F>
  void for_each_outcome(F&& f) const {
    const std::size_t na = chain_.n_actions();
    for (StateId s = 0; s < chain_.n_states(); ++s) {
      for (ActionId a = 0; a < na; ++a) {
        const double w = mu_(static_cast<Eigen::Index>(s * na + a));
        if (w == 0.0) continue;
        for (const auto& succ : successors(s, a)) f(Observation{s, a, succ.reward, succ.next}, w * succ.prob);
      }
    }
  }

  std::vector<NextStateTerms> next_state_table(const SoftmaxSpec& spec, const Vector& theta) const {
    std::vector<NextStateTerms> table;
    table.reserve(chain_.n_states());
    for (StateId s = 0; s < chain_.n_states(); ++s)
      table.push_back(next_state_terms(spec, features_, theta, s));
    return table;
  }

  Vector expected_td_vector(const SoftmaxSpec& spec, const Vector& theta) const {
    return td_vector(next_state_table(spec, theta), theta);
  }

  Vector omega_star(const SoftmaxSpec& spec, const Vector& theta) const {
    return solve(expected_td_vector(spec, theta));
  }

  double objective(const SoftmaxSpec& spec, const Vector& theta) const {
    const Vector v = expected_td_vector(spec, theta);
    return std::max(0.0, v.dot(solve(v)));
  }

  /// v, omega*, J and grad J from one pass over the successor tables.
  OracleEval evaluate(const SoftmaxSpec& spec, const Vector& theta) const {
    check_dim(theta);
    const auto next = next_state_table(spec, theta);
    OracleEval out;
    out.td_vector = td_vector(next, theta);
    out.omega_star = solve(out.td_vector);
    out.objective = std::max(0.0, out.td_vector.dot(out.omega_star));

    // E_mu[phi-hat phi^T] omega* = sum mu(s,a) (phi_{s,a}^T omega*) sum_{s'} P phi-hat_{s'}
    const std::size_t na = chain_.n_actions();
    Vector cross = Vector::Zero(theta.size());
    Vector expected_hat(theta.size());
    for (StateId s = 0; s < chain_.n_states(); ++s) {
      for (ActionId a = 0; a < na; ++a) {
        const double w = mu_(static_cast<Eigen::Index>(s * na + a));
        if (w == 0.0) continue;
        expected_hat.setZero();
        for (const auto& succ : successors(s, a)) expected_hat += succ.prob * next[succ.next].grad;
        cross += (w * features_.phi(s, a).dot(out.omega_star)) * expected_hat;
      }
    }
    out.gradient = 2.0 * (gamma() * cross - out.td_vector);
    return out;
  }

  Vector grad_objective(const SoftmaxSpec& spec, const Vector& theta) const {
    return evaluate(spec, theta).gradient;
  }

  double tracking_error(const SoftmaxSpec& spec, const Vector& theta, const Vector& omega) const {
    return (omega - omega_star(spec, theta)).norm();
  }

 private:
  void check_dim(const Vector& theta) const {
    if (static_cast<std::size_t>(theta.size()) != features_.n_features())
      throw std::invalid_argument("ExactModel: weight dimension does not match feature count");
  }

  Vector td_vector(const std::vector<NextStateTerms>& next, const Vector& theta) const {
    check_dim(theta);
    const std::size_t na = chain_.n_actions();
    const double g = gamma();
    Vector v = Vector::Zero(theta.size());
    for (StateId s = 0; s < chain_.n_states(); ++s) {
      for (ActionId a = 0; a < na; ++a) {
        const double w = mu_(static_cast<Eigen::Index>(s * na + a));
        if (w == 0.0) continue;
        const auto phi = features_.phi(s, a);
        const double q = phi.dot(theta);
        double expected_delta = 0.0;
        for (const auto& succ : successors(s, a))
          expected_delta += succ.prob * (succ.reward + g * next[succ.next].vbar - q);
        v += (w * expected_delta) * phi;
      }
    }
    return v;
  }

  TabularMdp chain_;
  FeatureMap features_;
  Vector mu_;
  Vector nu_;
  Matrix cov_;
  double lambda_min_ = 0.0;
  Eigen::LLT<Matrix> llt_;
  std::vector<std::vector<Successor>> successors_;
};

inline ExactModel build_exact_model(const TabularMdp& mdp, const BehaviorPolicy& policy,
                                    const FeatureMap& features) {
  return {mdp, policy, features};
}

// ---------------------------------------------------------------------------
// Assumption report

struct AssumptionReport {
  double lambda_min = 0.0;
  double max_feature_norm = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double rho_hat = 1.0;
  std::vector<double> mixing;  ///< d(t), t = 0..horizon
  bool solvable = false;        ///< C nonsingular
  bool bounded_features = false;
  bool smooth_policy = false;
  bool ergodic = false;
  std::string note;
};

/// Report-only check of the four standing assumptions. Never throws on failure.
inline AssumptionReport validate_assumptions(const TabularMdp& mdp, const BehaviorPolicy& policy,
                                             const FeatureMap& features, const SoftmaxSpec& spec,
                                             std::size_t mixing_horizon = 50) {
  AssumptionReport report;
  report.max_feature_norm = features.max_column_norm();
  report.bounded_features = report.max_feature_norm <= 1.0 + 1e-9;
  report.k1 = 2.0 * spec.sigma();
  report.k2 = 8.0 * spec.sigma() * spec.sigma();
  report.smooth_policy = true;
  try {
    const auto stationary = stationary_distribution(mdp, policy);
    report.lambda_min = min_eigenvalue(feature_covariance(features, stationary.pairs));
    report.solvable = report.lambda_min > kSingularThreshold;
    report.mixing = mixing_probe(mdp, policy, mixing_horizon);
    report.rho_hat = fit_geometric_rate(report.mixing, 1, mixing_horizon);
    report.ergodic = report.rho_hat < 1.0;
  } catch (const DegenerateChainError& e) {
    report.note = e.what();
  }
  return report;
}

}  // namespace ggq
