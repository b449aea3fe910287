#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggq/errors.hpp"
#include "ggq/rng.hpp"

namespace ggq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using StateId = std::size_t;
using ActionId = std::size_t;

/**
 * Finite MDP with dense transition and reward tensors indexed [s][a][s'].
 *
 * Rows of the transition tensor are probability distributions (checked to
 * 1e-12) and the discount lies in [0, 1). The largest absolute reward is
 * recorded at construction as r_max().
 */
class TabularMdp {
 public:
  TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
             std::vector<double> reward, double discount, std::string layout_tag = {},
             StateId start_state = 0)
      : n_states_(n_states),
        n_actions_(n_actions),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        discount_(discount),
        layout_tag_(std::move(layout_tag)),
        start_state_(start_state) {
    if (n_states_ == 0 || n_actions_ == 0)
      throw std::invalid_argument("TabularMdp: state and action counts must be positive");
    const std::size_t expected = n_states_ * n_actions_ * n_states_;
    if (transition_.size() != expected || reward_.size() != expected)
      throw std::invalid_argument("TabularMdp: tensor sizes must equal |S|*|A|*|S|");
    if (!(discount_ >= 0.0 && discount_ < 1.0))
      throw std::invalid_argument("TabularMdp: discount must lie in [0, 1)");
    if (start_state_ >= n_states_)
      throw std::invalid_argument("TabularMdp: start state out of range");
    for (StateId s = 0; s < n_states_; ++s) {
      for (ActionId a = 0; a < n_actions_; ++a) {
        double total = 0.0;
        for (double p : transition_row(s, a)) {
          if (!(p >= 0.0)) throw std::invalid_argument("TabularMdp: negative transition probability");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
          std::ostringstream msg;
          msg << "TabularMdp: transition row (" << s << "," << a << ") sums to " << total;
          throw std::invalid_argument(msg.str());
        }
      }
    }
    for (double r : reward_) {
      if (!std::isfinite(r)) throw std::invalid_argument("TabularMdp: non-finite reward");
      r_max_ = std::max(r_max_, std::abs(r));
    }
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::size_t n_pairs() const noexcept { return n_states_ * n_actions_; }
  double discount() const noexcept { return discount_; }
  double r_max() const noexcept { return r_max_; }
  StateId start_state() const noexcept { return start_state_; }
  const std::string& layout_tag() const noexcept { return layout_tag_; }

  double p(StateId s, ActionId a, StateId next) const { return transition_[index(s, a, next)]; }
  double r(StateId s, ActionId a, StateId next) const { return reward_[index(s, a, next)]; }

  std::span<const double> transition_row(StateId s, ActionId a) const {
    return {transition_.data() + index(s, a, 0), n_states_};
  }
  std::span<const double> reward_row(StateId s, ActionId a) const {
    return {reward_.data() + index(s, a, 0), n_states_};
  }

  const std::vector<double>& transitions() const noexcept { return transition_; }
  const std::vector<double>& rewards() const noexcept { return reward_; }

  TabularMdp with_discount(double gamma) const {
    return {n_states_, n_actions_, transition_, reward_, gamma, layout_tag_, start_state_};
  }

  bool operator==(const TabularMdp&) const = default;

 private:
  std::size_t index(StateId s, ActionId a, StateId next) const noexcept {
    return (s * n_actions_ + a) * n_states_ + next;
  }

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  double discount_;
  std::string layout_tag_;
  StateId start_state_;
  double r_max_ = 0.0;
};

/// Fixed data-collecting policy, rows indexed by state.
class BehaviorPolicy {
 public:
  explicit BehaviorPolicy(Matrix probs) : probs_(std::move(probs)) {
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
      if ((probs_.row(s).array() < 0.0).any())
        throw std::invalid_argument("BehaviorPolicy: negative probability");
      if (std::abs(probs_.row(s).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("BehaviorPolicy: row does not sum to 1");
    }
  }

  std::size_t n_states() const noexcept { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t n_actions() const noexcept { return static_cast<std::size_t>(probs_.cols()); }
  double operator()(StateId s, ActionId a) const {
    return probs_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Matrix& probs() const noexcept { return probs_; }

 private:
  Matrix probs_;
};

/// One transition (s, a, r, s').
struct Observation {
  StateId s = 0;
  ActionId a = 0;
  double r = 0.0;
  StateId s_next = 0;

  bool operator==(const Observation&) const = default;
};

inline BehaviorPolicy uniform_behavior(const TabularMdp& mdp) {
  const auto na = static_cast<double>(mdp.n_actions());
  return BehaviorPolicy(Matrix::Constant(static_cast<Eigen::Index>(mdp.n_states()),
                                         static_cast<Eigen::Index>(mdp.n_actions()), 1.0 / na));
}

// ---------------------------------------------------------------------------
// Frozen Lake

namespace frozen_lake_detail {
inline constexpr std::size_t kSide = 4;
inline constexpr const char* kLayout[kSide] = {"SFFF", "FHFH", "FFFH", "HFFG"};

enum Move : ActionId { kLeft = 0, kDown = 1, kRight = 2, kUp = 3 };

inline char cell(StateId s) { return kLayout[s / kSide][s % kSide]; }

inline StateId step(StateId s, ActionId move) {
  std::size_t row = s / kSide;
  std::size_t col = s % kSide;
  switch (move) {
    case kLeft: col = col > 0 ? col - 1 : col; break;
    case kDown: row = std::min(row + 1, kSide - 1); break;
    case kRight: col = std::min(col + 1, kSide - 1); break;
    case kUp: row = row > 0 ? row - 1 : row; break;
    default: break;
  }
  return row * kSide + col;
}
}  // namespace frozen_lake_detail

/**
 * The 4x4 Frozen Lake grid ("SFFF/FHFH/FFFH/HFFG"), actions ordered
 * left, down, right, up. Holes and the goal are absorbing with zero reward;
 * entering the goal pays 1. With `slippery`, the intended move and its two
 * perpendicular moves each happen with probability 1/3.
 */
inline TabularMdp frozen_lake(bool slippery, double gamma = 0.95) {
  namespace fl = frozen_lake_detail;
  constexpr std::size_t ns = fl::kSide * fl::kSide;
  constexpr std::size_t na = 4;
  std::vector<double> p(ns * na * ns, 0.0);
  std::vector<double> r(ns * na * ns, 0.0);
  auto at = [](StateId s, ActionId a, StateId n) { return (s * na + a) * ns + n; };

  for (StateId s = 0; s < ns; ++s) {
    const char c = fl::cell(s);
    for (ActionId a = 0; a < na; ++a) {
      if (c == 'H' || c == 'G') {
        p[at(s, a, s)] = 1.0;
        continue;
      }
      std::vector<ActionId> moves;
      if (slippery) {
        moves = {(a + 3) % 4, a, (a + 1) % 4};
      } else {
        moves = {a};
      }
      const double share = 1.0 / static_cast<double>(moves.size());
      for (ActionId m : moves) {
        const StateId next = fl::step(s, m);
        p[at(s, a, next)] += share;
        if (fl::cell(next) == 'G') r[at(s, a, next)] = 1.0;
      }
    }
  }
  return {ns, na, std::move(p), std::move(r), gamma,
          slippery ? "frozenlake4x4-slippery" : "frozenlake4x4", 0};
}

// ---------------------------------------------------------------------------
// Behavior chain

/**
 * Rewires absorbing zero-reward states (every action self-loops with
 * probability 1 and reward 0) to jump to the start state with reward 0.
 * Idempotent; MDPs without such states are returned unchanged.
 */
inline TabularMdp continualized(const TabularMdp& mdp) {
  const std::size_t ns = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  std::vector<StateId> terminals;
  for (StateId s = 0; s < ns; ++s) {
    if (s == mdp.start_state()) continue;
    bool absorbing = true;
    for (ActionId a = 0; a < na && absorbing; ++a)
      absorbing = mdp.p(s, a, s) == 1.0 && mdp.r(s, a, s) == 0.0;
    if (absorbing) terminals.push_back(s);
  }
  if (terminals.empty()) return mdp;

  std::vector<double> p = mdp.transitions();
  std::vector<double> r = mdp.rewards();
  for (StateId s : terminals) {
    for (ActionId a = 0; a < na; ++a) {
      const std::size_t row = (s * na + a) * ns;
      std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(row), ns, 0.0);
      std::fill_n(r.begin() + static_cast<std::ptrdiff_t>(row), ns, 0.0);
      p[row + mdp.start_state()] = 1.0;
    }
  }
  return {ns, na, std::move(p), std::move(r), mdp.discount(), mdp.layout_tag(),
          mdp.start_state()};
}

/// State-to-state kernel P_pi[s][s'] = sum_a pi(a|s) P(s'|s,a).
inline Matrix behavior_kernel(const TabularMdp& mdp, const BehaviorPolicy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
    throw std::invalid_argument("behavior policy shape does not match the MDP");
  const auto ns = static_cast<Eigen::Index>(mdp.n_states());
  Matrix kernel = Matrix::Zero(ns, ns);
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      const double w = policy(s, a);
      if (w == 0.0) continue;
      const auto row = mdp.transition_row(s, a);
      for (StateId n = 0; n < mdp.n_states(); ++n)
        kernel(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) += w * row[n];
    }
  }
  return kernel;
}

struct StationaryDistribution {
  Vector states;  ///< nu(s)
  Vector pairs;   ///< mu(s,a) = nu(s) pi_b(a|s), flattened s * |A| + a
};

namespace chain_detail {
inline std::vector<std::vector<bool>> reachability(const Matrix& kernel) {
  const auto n = static_cast<std::size_t>(kernel.rows());
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<std::size_t> stack{src};
    reach[src][src] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (kernel(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0 &&
            !reach[src][v]) {
          reach[src][v] = true;
          stack.push_back(v);
        }
      }
    }
  }
  return reach;
}

/// Closed communicating classes of the kernel's support graph.
inline std::vector<std::vector<std::size_t>> closed_classes(const Matrix& kernel) {
  const auto reach = reachability(kernel);
  const std::size_t n = reach.size();
  std::vector<bool> assigned(n, false);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t s = 0; s < n; ++s) {
    if (assigned[s]) continue;
    bool closed = true;
    for (std::size_t v = 0; v < n && closed; ++v)
      if (reach[s][v] && !reach[v][s]) closed = false;
    if (!closed) continue;
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < n; ++v) {
      if (reach[s][v]) {
        members.push_back(v);
        assigned[v] = true;
      }
    }
    classes.push_back(std::move(members));
  }
  return classes;
}
}  // namespace chain_detail

/**
 * Stationary distribution of the behavior chain after restart rewiring.
 *
 * Solves the stacked system [P_pi^T - I; 1^T] nu = [0; 1] by column-pivoted
 * QR. Throws DegenerateChainError when the chain has more than one closed
 * class; the error lists the states unreachable from the start state's
 * recurrent class.
 */
inline StationaryDistribution stationary_distribution(const TabularMdp& mdp,
                                                      const BehaviorPolicy& policy) {
  const TabularMdp chain = continualized(mdp);
  const Matrix kernel = behavior_kernel(chain, policy);
  const auto ns = kernel.rows();

  const auto classes = chain_detail::closed_classes(kernel);
  if (classes.size() != 1) {
    const auto reach = chain_detail::reachability(kernel);
    std::size_t home = 0;
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (reach[chain.start_state()][classes[c].front()]) home = c;
    std::vector<std::size_t> unreachable;
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (c != home) unreachable.insert(unreachable.end(), classes[c].begin(), classes[c].end());
    std::sort(unreachable.begin(), unreachable.end());
    std::ostringstream msg;
    msg << "degenerate behavior chain: " << classes.size()
        << " closed classes; states unreachable from the start state's class: {";
    for (std::size_t i = 0; i < unreachable.size(); ++i) msg << (i ? "," : "") << unreachable[i];
    msg << "}";
    throw DegenerateChainError(msg.str(), std::move(unreachable));
  }

  Matrix system(ns + 1, ns);
  system.topRows(ns) = kernel.transpose() - Matrix::Identity(ns, ns);
  system.row(ns).setOnes();
  Vector rhs = Vector::Zero(ns + 1);
  rhs(ns) = 1.0;
  Vector nu = system.colPivHouseholderQr().solve(rhs);
  nu = nu.cwiseMax(0.0);
  nu /= nu.sum();

  StationaryDistribution out;
  out.states = nu;
  out.pairs.resize(static_cast<Eigen::Index>(mdp.n_pairs()));
  for (StateId s = 0; s < mdp.n_states(); ++s)
    for (ActionId a = 0; a < mdp.n_actions(); ++a)
      out.pairs(static_cast<Eigen::Index>(s * mdp.n_actions() + a)) =
          nu(static_cast<Eigen::Index>(s)) * policy(s, a);
  return out;
}

/**
 * Sup-over-start-states total variation distance to stationarity,
 * d(t) = max_s0 TV(P^t(.|s0), nu) for t = 0..horizon (horizon + 1 values).
 */
inline std::vector<double> mixing_probe(const TabularMdp& mdp, const BehaviorPolicy& policy,
                                        std::size_t horizon) {
  const TabularMdp chain = continualized(mdp);
  const Matrix kernel = behavior_kernel(chain, policy);
  const Vector nu = stationary_distribution(mdp, policy).states;
  const auto ns = kernel.rows();

  Matrix dist = Matrix::Identity(ns, ns);
  std::vector<double> d;
  d.reserve(horizon + 1);
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (t > 0) dist = dist * kernel;
    double worst = 0.0;
    for (Eigen::Index s = 0; s < ns; ++s)
      worst = std::max(worst, 0.5 * (dist.row(s).transpose() - nu).cwiseAbs().sum());
    d.push_back(worst);
  }
  return d;
}

/**
 * Geometric decay rate rho fitted to d(t) by least squares on log d(t) over
 * t in [first, last]. Points at or below `floor` (round-off level) are skipped.
 * Returns 0 when fewer than two usable points remain.
 */
inline double fit_geometric_rate(const std::vector<double>& d, std::size_t first, std::size_t last,
                                 double floor = 1e-13) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t t = first; t <= last && t < d.size(); ++t) {
    if (d[t] <= floor) continue;
    const double x = static_cast<double>(t);
    const double y = std::log(d[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace ggq
