#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "helpers.hpp"

using namespace ggq;

namespace {

std::shared_ptr<const SamplingTables> tables_for(const TabularMdp& mdp) {
  return std::make_shared<const SamplingTables>(mdp, uniform_behavior(mdp));
}

}  // namespace

TEST(DrawFromCdf, SkipsZeroMassEntries) {
  const std::vector<double> cdf = {0.0, 0.5, 0.5, 1.0, 2.0};
  EXPECT_EQ(draw_from_cdf(cdf, 0.0), 1u);
  EXPECT_EQ(draw_from_cdf(cdf, 0.49), 1u);
  EXPECT_EQ(draw_from_cdf(cdf, 0.5), 3u);
  EXPECT_EQ(draw_from_cdf(cdf, 0.999999), 3u);
}

TEST(SamplerKind, Parse) {
  EXPECT_EQ(parse_sampler_kind("iid"), SamplerKind::iid);
  EXPECT_EQ(parse_sampler_kind("markov"), SamplerKind::markov);
  EXPECT_THROW(parse_sampler_kind("mcmc"), std::invalid_argument);
  EXPECT_EQ(to_string(SamplerKind::markov), "markov");
}

TEST(MarkovSampler, DegenerateMdpGivesConstantStream) {
  const auto tables = tables_for(test::one_state(1, 0.25));
  MarkovSampler markov(tables, 1);
  IidSampler iid(tables, 1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(markov.next(), (Observation{0, 0, 0.25, 0}));
    EXPECT_EQ(iid.next(), (Observation{0, 0, 0.25, 0}));
  }
}

TEST(MarkovSampler, SameSeedSamePrefix) {
  const auto tables = tables_for(generate_garnet({10, 5, 10, 5}, 1).mdp);
  MarkovSampler a(tables, 17), b(tables, 17), c(tables, 18);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto oa = a.next();
    ASSERT_EQ(oa, b.next());
    differs |= !(oa == c.next());
  }
  EXPECT_TRUE(differs);
}

TEST(MarkovSampler, FollowsTrajectory) {
  const auto tables = tables_for(generate_garnet({6, 3, 2, 2}, 4).mdp);
  MarkovSampler m(tables, 2, MarkovSampler::Start::fixed, 3);
  auto prev = m.next();
  EXPECT_EQ(prev.s, 3u);
  for (int i = 0; i < 500; ++i) {
    const auto o = m.next();
    ASSERT_EQ(o.s, prev.s_next);
    ASSERT_GT(tables->chain().p(o.s, o.a, o.s_next), 0.0);
    prev = o;
  }
  EXPECT_THROW(MarkovSampler(tables, 2, MarkovSampler::Start::fixed, 6), std::invalid_argument);
}

TEST(MarkovSampler, StateFrequenciesMatchStationary) {
  const auto mdp = generate_garnet({10, 5, 10, 5}, 1).mdp;
  const auto nu = stationary_distribution(mdp, uniform_behavior(mdp)).states;
  MarkovSampler m(tables_for(mdp), 3);
  Vector counts = Vector::Zero(10);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) counts(static_cast<Eigen::Index>(m.next().s)) += 1.0;
  EXPECT_LE(test::l1(counts / n, nu), 0.02);
}

TEST(IidSampler, PairFrequenciesMatchMu) {
  const auto mdp = generate_garnet({10, 5, 10, 5}, 1).mdp;
  const auto mu = stationary_distribution(mdp, uniform_behavior(mdp)).pairs;
  IidSampler iid(tables_for(mdp), 4);
  Vector counts = Vector::Zero(50);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto o = iid.next();
    counts(static_cast<Eigen::Index>(o.s * 5 + o.a)) += 1.0;
  }
  EXPECT_LE(test::l1(counts / n, mu), 0.02);
}

TEST(IidSampler, NoLagOneAutocorrelation) {
  const auto mdp = generate_garnet({10, 5, 10, 5}, 1).mdp;
  IidSampler iid(tables_for(mdp), 5);
  constexpr int n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(iid.next().s);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < n) num += (x[i] - mean) * (x[i + 1] - mean);
  }
  EXPECT_LT(std::abs(num / den), 3.0 / std::sqrt(n));
}

TEST(Samplers, LakeNeverLeavesSupport) {
  for (bool slippery : {false, true}) {
    const auto lake = frozen_lake(slippery);
    const auto tables = tables_for(lake);
    MarkovSampler m(tables, 6);
    IidSampler iid(tables, 6);
    for (int i = 0; i < 20000; ++i) {
      const auto a = m.next();
      const auto b = iid.next();
      ASSERT_GT(tables->chain().p(a.s, a.a, a.s_next), 0.0);
      ASSERT_GT(tables->chain().p(b.s, b.a, b.s_next), 0.0);
    }
  }
}

TEST(Sampler, CountsConsumption) {
  const auto tables = tables_for(generate_garnet({5, 2, 3, 2}, 1).mdp);
  for (auto kind : {SamplerKind::iid, SamplerKind::markov}) {
    Sampler s(kind, tables, 1);
    for (int i = 0; i < 37; ++i) s.next();
    EXPECT_EQ(s.consumed(), 37u);
  }
}
