#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"

using namespace ggq;

namespace {

Vector naive_policy(double sigma, const FeatureMap& f, const Vector& theta, StateId s) {
  Vector p(static_cast<Eigen::Index>(f.n_actions()));
  double z = 0.0;
  for (ActionId a = 0; a < f.n_actions(); ++a) {
    p(static_cast<Eigen::Index>(a)) = std::exp(sigma * f.phi(s, a).dot(theta));
    z += p(static_cast<Eigen::Index>(a));
  }
  return p / z;
}

double two_pass_vbar(double sigma, const FeatureMap& f, const Vector& theta, StateId s) {
  const Vector pi = naive_policy(sigma, f, theta, s);
  double v = 0.0;
  for (ActionId a = 0; a < f.n_actions(); ++a) v += pi(static_cast<Eigen::Index>(a)) * f.phi(s, a).dot(theta);
  return v;
}

}  // namespace

TEST(SoftmaxSpec, RejectsNonPositive) {
  EXPECT_THROW(SoftmaxSpec(0.0), std::invalid_argument);
  EXPECT_THROW(SoftmaxSpec(-1.0), std::invalid_argument);
  EXPECT_THROW(SoftmaxSpec{std::numeric_limits<double>::infinity()}, std::invalid_argument);
}

TEST(TargetPolicy, ZeroWeightsGiveUniform) {
  const auto f = random_features(3, 4, 5, 1);
  const Vector pi = target_policy(SoftmaxSpec(2.0), f, Vector::Zero(3), 2);
  for (Eigen::Index a = 0; a < 5; ++a) EXPECT_NEAR(pi(a), 0.2, 1e-15);
}

TEST(TargetPolicy, ConcentratesOnArgmax) {
  Matrix t(1, 2);
  t << 1.0, 0.0;
  const FeatureMap f(t, 1, 2);
  const Vector theta = Vector::Constant(1, 1.0);  // gap of 1 between the two Q-values
  const Vector pi = target_policy(SoftmaxSpec(11.0), f, theta, 0);
  EXPECT_GT(pi(0), 0.99);
}

TEST(TargetPolicy, MatchesNaiveFormula) {
  const auto f = random_features(4, 6, 3, 2);
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector theta = test::in_ball(gen, 4, 5.0);
    const StateId s = gen() % 6;
    const Vector pi = target_policy(SoftmaxSpec(1.3), f, theta, s);
    EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
    EXPECT_LE((pi - naive_policy(1.3, f, theta, s)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Softmax, ShiftInvariance) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    Vector logits(6);
    for (auto& x : logits) x = 3.0 * normal(gen);
    const double c = 50.0 * normal(gen);
    EXPECT_LE((softmax(logits) - softmax(logits.array() + c)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Softmax, HugeLogitsStayFinite) {
  Vector logits(3);
  logits << 1000.0, 999.0, -1000.0;
  const Vector p = softmax(logits);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

TEST(Vbar, SpecialCases) {
  const auto f = random_features(3, 4, 2, 5);
  EXPECT_EQ(vbar(SoftmaxSpec(1.0), f, Vector::Zero(3), 1), 0.0);
  const auto single = random_features(3, 4, 1, 5);
  const Vector theta = Vector::LinSpaced(3, -1.0, 2.0);
  for (double sigma : {0.1, 1.0, 30.0}) EXPECT_NEAR(vbar(SoftmaxSpec(sigma), single, theta, 2), single.phi(2, 0).dot(theta), 1e-14);
}

TEST(Vbar, MatchesTwoPassComputation) {
  const auto f = random_features(5, 4, 4, 6);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector theta = test::in_ball(gen, 5, 10.0);
    const StateId s = gen() % 4;
    EXPECT_NEAR(vbar(SoftmaxSpec(0.8), f, theta, s), two_pass_vbar(0.8, f, theta, s), 1e-10);
    EXPECT_NEAR(next_state_terms(SoftmaxSpec(0.8), f, theta, s).vbar, two_pass_vbar(0.8, f, theta, s), 1e-10);
  }
}

TEST(GradVbar, FiniteDifferences) {
  const auto f = random_features(5, 4, 4, 7);
  const SoftmaxSpec spec(1.0);
  std::mt19937_64 gen(6);
  const double h = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    const Vector theta = test::in_ball(gen, 5, 5.0);
    const StateId s = gen() % 4;
    Vector fd(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      const Vector e = Vector::Unit(5, i) * h;
      fd(i) = (vbar(spec, f, theta + e, s) - vbar(spec, f, theta - e, s)) / (2 * h);
    }
    const Vector g = grad_vbar(spec, f, theta, s);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST(GradVbar, NearZeroTemperatureIsMeanFeature) {
  const auto f = random_features(4, 3, 5, 8);
  const Vector theta = Vector::Constant(4, 2.0);
  const Vector g = grad_vbar(SoftmaxSpec(1e-12), f, theta, 1);
  const Vector mean = f.state_block(1).rowwise().mean();
  EXPECT_LE((g - mean).norm(), 1e-10);
}

TEST(GradVbar, NormBound) {
  const auto f = random_features(5, 6, 4, 9);
  const double R = 10.0;
  for (double sigma : {0.5, 1.0, 3.0}) {
    const SoftmaxSpec spec(sigma);
    std::mt19937_64 gen(7);
    const double bound = 4.0 * R * 2.0 * sigma + 1.0;
    for (int trial = 0; trial < 500; ++trial) {
      const Vector theta = test::in_ball(gen, 5, R);
      EXPECT_LE(grad_vbar(spec, f, theta, gen() % 6).norm(), bound);
    }
  }
}

TEST(SoftmaxGradient, FiniteDifferences) {
  const auto f = random_features(4, 3, 3, 10);
  const SoftmaxSpec spec(1.5);
  std::mt19937_64 gen(8);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector theta = test::in_ball(gen, 4, 3.0);
    const StateId s = gen() % 3;
    const ActionId a = gen() % 3;
    Vector fd(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const Vector e = Vector::Unit(4, i) * h;
      fd(i) = (target_policy(spec, f, theta + e, s)(static_cast<Eigen::Index>(a)) -
               target_policy(spec, f, theta - e, s)(static_cast<Eigen::Index>(a))) / (2 * h);
    }
    EXPECT_LE((softmax_gradient(spec, f, theta, s, a) - fd).norm(), 1e-8);
  }
}

TEST(SoftmaxLipschitz, PolicyAndGradientBounds) {
  const auto f = random_features(5, 6, 4, 11);
  const double R = 10.0;
  for (double sigma : {0.5, 1.0}) {
    const SoftmaxSpec spec(sigma);
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 2000; ++trial) {
      const Vector t1 = test::in_ball(gen, 5, R);
      const Vector t2 = trial % 2 ? test::in_ball(gen, 5, R) : Vector(t1 + test::in_ball(gen, 5, 0.05));
      const double dist = (t1 - t2).norm();
      const StateId s = gen() % 6;
      const Vector p1 = target_policy(spec, f, t1, s);
      const Vector p2 = target_policy(spec, f, t2, s);
      for (ActionId a = 0; a < 4; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        ASSERT_LE(std::abs(p1(ia) - p2(ia)), 2.0 * sigma * dist + 1e-9);
        const Vector g1 = softmax_gradient(spec, f, t1, s, a);
        const Vector g2 = softmax_gradient(spec, f, t2, s, a);
        ASSERT_LE((g1 - g2).norm(), 8.0 * sigma * sigma * dist + 1e-9);
      }
    }
  }
}

TEST(LipschitzConstants, SoftmaxConstants) {
  const auto c1 = lipschitz_constants(SoftmaxSpec(1.0), 0.95, 5, 1.0, 10.0, 0.1);
  EXPECT_EQ(c1.k1, 2.0);
  EXPECT_EQ(c1.k2, 8.0);
  const auto c2 = lipschitz_constants(SoftmaxSpec(0.5), 0.95, 5, 1.0, 10.0, 0.1);
  EXPECT_EQ(c2.k1, 1.0);
  EXPECT_EQ(c2.k2, 2.0);
}

TEST(LipschitzConstants, HandSubstitution) {
  // sigma = 1, gamma = 0.95, |A| = 5, r_max = 1, R = 10, lambda = 0.1, worked by hand.
  const auto c = lipschitz_constants(SoftmaxSpec(1.0), 0.95, 5, 1.0, 10.0, 0.1);
  EXPECT_NEAR(c.K, 349637.05, 1e-6);
  EXPECT_NEAR(c.k3, 174915.475, 1e-6);
  EXPECT_NEAR(c.w_star_lip, 969.5, 1e-9);
  EXPECT_NEAR(c.g_omega_lip, 95.95, 1e-12);
}

TEST(LipschitzConstants, Errors) {
  EXPECT_THROW(lipschitz_constants(SoftmaxSpec(1.0), 0.9, 2, 1.0, 10.0, 0.0), std::invalid_argument);
  EXPECT_THROW(lipschitz_constants(SoftmaxSpec(1.0), 0.9, 2, 1.0, 10.0, -1.0), std::invalid_argument);
  EXPECT_THROW(lipschitz_constants(SoftmaxSpec(1.0), 0.9, 2, 1.0, 0.0, 1.0), std::invalid_argument);
}
