#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace ggq;
namespace fs = std::filesystem;

namespace {

MetricsTrace trace_of(const std::vector<std::pair<std::uint64_t, double>>& points) {
  MetricsTrace t;
  std::uint64_t iter = 0;
  for (const auto& [x, y] : points) {
    TraceRow row;
    row.samples_consumed = x;
    row.iter = iter++;
    row.grad_norm_sq = y;
    row.min_grad_norm_sq = y;
    t.rows.push_back(row);
  }
  return t;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_text_file(entry.path());
  return files;
}

}  // namespace

TEST(NearestRank, SmallSamples) {
  EXPECT_EQ(nearest_rank({3.0, 1.0, 2.0}, 50.0), 2.0);
  EXPECT_EQ(nearest_rank({3.0, 1.0, 2.0}, 5.0), 1.0);
  EXPECT_EQ(nearest_rank({3.0, 1.0, 2.0}, 95.0), 3.0);
  EXPECT_EQ(nearest_rank({1.0, 2.0, 3.0, 4.0}, 50.0), 2.0);
  EXPECT_EQ(nearest_rank({7.0}, 0.0), 7.0);
  EXPECT_THROW(nearest_rank({}, 50.0), std::invalid_argument);
}

TEST(Bands, IdenticalTracesCollapse) {
  const auto t = trace_of({{0, 4.0}, {10, 2.0}, {20, 1.0}});
  const auto band = aggregate_bands({t, t, t}, TraceMetric::grad_norm_sq, {0.0, 5.0, 20.0});
  EXPECT_EQ(band.p05, band.p50);
  EXPECT_EQ(band.p95, band.p50);
  EXPECT_EQ(band.p50[0], 4.0);
  EXPECT_EQ(band.p50[1], 3.0);
  EXPECT_EQ(band.p50[2], 1.0);
}

TEST(Bands, MedianOfThree) {
  const auto band = aggregate_bands({trace_of({{0, 1.0}, {10, 1.0}}), trace_of({{0, 2.0}, {10, 2.0}}),
                                     trace_of({{0, 3.0}, {10, 3.0}})},
                                    TraceMetric::grad_norm_sq, linear_grid(10.0, 3));
  for (double v : band.p50) EXPECT_EQ(v, 2.0);
  for (double v : band.p05) EXPECT_EQ(v, 1.0);
  for (double v : band.p95) EXPECT_EQ(v, 3.0);
}

TEST(Bands, PercentilesAreOrdered) {
  std::mt19937_64 gen(1);
  std::lognormal_distribution<double> value;
  std::vector<MetricsTrace> traces;
  for (int k = 0; k < 25; ++k) {
    std::vector<std::pair<std::uint64_t, double>> pts;
    for (std::uint64_t x = 0; x <= 100; x += 5 + k % 3) pts.push_back({x, value(gen)});
    if (pts.back().first != 100) pts.push_back({100, value(gen)});
    traces.push_back(trace_of(pts));
  }
  const auto band = aggregate_bands(traces, TraceMetric::grad_norm_sq, linear_grid(100.0, 41));
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    EXPECT_LE(band.p05[i], band.p50[i]);
    EXPECT_LE(band.p50[i], band.p95[i]);
  }
}

TEST(Bands, Errors) {
  const auto t = trace_of({{0, 1.0}, {10, 1.0}});
  EXPECT_THROW(aggregate_bands({t}, TraceMetric::grad_norm_sq, {0.0}), std::invalid_argument);
  EXPECT_THROW(aggregate_bands({t, t}, TraceMetric::grad_norm_sq, {0.0, 11.0}), std::invalid_argument);
  EXPECT_THROW(aggregate_bands({t, t}, TraceMetric::mc_variance, {0.0}), std::invalid_argument);
}

TEST(RateFit, RecoversExponent) {
  std::vector<std::pair<double, double>> pts;
  for (double T : {100.0, 300.0, 1000.0, 3000.0}) pts.push_back({T, 5.0 / std::sqrt(T)});
  const auto fit = rate_fit(pts);
  EXPECT_NEAR(fit.slope, -0.5, 1e-10);
  EXPECT_NEAR(fit.intercept, std::log(5.0), 1e-10);
  EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-10);

  for (auto& p : pts) p.second = 0.7;
  EXPECT_NEAR(rate_fit(pts).slope, 0.0, 1e-12);
}

TEST(RateFit, Errors) {
  EXPECT_THROW(rate_fit({{1.0, 1.0}, {100.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(rate_fit({{10.0, 1.0}, {20.0, 1.0}, {50.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(rate_fit({{10.0, 1.0}, {20.0, 0.0}, {500.0, 1.0}}), std::invalid_argument);
}

TEST(McVariance, DeterministicOutcomeMatchesExact) {
  // One state and one action with a self-loop: every draw is the same transition.
  const auto mdp = test::one_state(1, 0.3);
  const Problem p(mdp, uniform_behavior(mdp), FeatureMap(Matrix::Ones(1, 1), 1, 1), SoftmaxSpec(1.0));
  const Vector theta = Vector::Constant(1, 0.5), omega = Vector::Constant(1, -0.2);
  const auto mc = mc_variance(p, theta, omega, 50, 9);
  const auto exact = exact_update_variance(p, theta, omega);
  EXPECT_NEAR(mc.scaled, exact.scaled, 1e-12);
  EXPECT_NEAR(mc.literal, exact.literal, 1e-12);
}

TEST(McVariance, AgreesWithExactWithinSampling) {
  const auto p = test::garnet_problem({10, 5, 10, 5}, 1);
  const Vector theta = Vector::Constant(5, 0.5);
  const Vector omega = p.model().omega_star(p.softmax(), theta);
  const GreedyGq rule(p.features(), p.softmax(), p.gamma());
  const Vector grad = p.model().grad_objective(p.softmax(), theta);

  // Standard error of the estimate from the exact fourth moment of the per-sample term.
  double m1 = 0.0, m2 = 0.0;
  p.model().for_each_outcome([&](const Observation& obs, double w) {
    const double x = (-2.0 * rule.g_direction(theta, omega, obs) - grad).squaredNorm();
    m1 += w * x;
    m2 += w * x * x;
  });
  constexpr std::size_t n = 100000;
  const double se = std::sqrt((m2 - m1 * m1) / n);
  const auto exact = exact_update_variance(p, theta, omega);
  EXPECT_NEAR(exact.scaled, m1, 1e-10);
  EXPECT_NEAR(mc_variance(p, theta, omega, n, 3).scaled, exact.scaled, 3.0 * se);
}

TEST(McVariance, BatchDividesSpread) {
  const auto p = test::garnet_problem({10, 5, 10, 5}, 1);
  const Vector theta = Vector::Constant(5, -0.3);
  const Vector omega = p.model().omega_star(p.softmax(), theta);
  const auto one = exact_update_variance(p, theta, omega, 1);
  const auto ten = exact_update_variance(p, theta, omega, 10);
  // At omega* the bias term vanishes, so only the spread remains.
  EXPECT_NEAR(ten.scaled * 10.0, one.scaled, 1e-9 * one.scaled);
  EXPECT_NEAR(one.literal - ten.literal, 0.9 * (one.scaled / 4.0), 1e-9 * one.scaled);
  EXPECT_THROW(exact_update_variance(p, theta, omega, 0), std::invalid_argument);
}

TEST(Plot, MatchesGoldenSvg) {
  const fs::path data(GGQ_TEST_DATA_DIR);
  std::ifstream in(data / "bands_small.csv");
  ASSERT_TRUE(in);
  PlotStyle style;
  style.title = "small";
  style.y_label = "metric";
  const std::string svg = render_band_svg(read_band_csv(in), style);
  EXPECT_EQ(svg, read_text_file(data / "bands_small.svg"));
  EXPECT_EQ(count(svg, "<path "), 6u);
  EXPECT_EQ(count(svg, "<polygon "), 2u);
  EXPECT_NE(svg.find("minibatch &amp; co"), std::string::npos);
}

TEST(Plot, RejectsBadInput) {
  std::stringstream empty("series,samples,p05,p50,p95\n");
  EXPECT_THROW(read_band_csv(empty), SchemaError);
  std::stringstream missing("series,samples,p05,p50\nx,0,1,1\n");
  EXPECT_THROW(read_band_csv(missing), SchemaError);
  std::stringstream bad("series,samples,p05,p50,p95\nx,0,1,y,1\n");
  EXPECT_THROW(read_band_csv(bad), SchemaError);
  EXPECT_THROW(render_band_svg({}, PlotStyle{}), SchemaError);
}

TEST(Experiment, SmokePresetIsFastAndReproducible) {
  const auto dir = fs::temp_directory_path() / "ggq_smoke_test";
  fs::remove_all(dir);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_experiment(preset("smoke"), dir / "a");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 1.0);
  EXPECT_EQ(result.traces.size(), 3u);
  run_experiment(preset("smoke"), dir / "b");
  const auto a = read_tree(dir / "a"), b = read_tree(dir / "b");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  const auto manifest = nlohmann::json::parse(a.at("manifest.json"));
  EXPECT_TRUE(config_from_json(manifest.at("config")) == preset("smoke"));
  EXPECT_EQ(manifest.at("library_version"), kVersion);
  fs::remove_all(dir);
}

TEST(Experiment, BandsAndPlotsForSeveralSeeds) {
  auto c = preset("smoke");
  c.n_seeds = 3;
  c.grid_points = 5;
  const auto dir = fs::temp_directory_path() / "ggq_bands_test";
  fs::remove_all(dir);
  const auto result = run_experiment(c, dir);
  EXPECT_EQ(result.bands.size(), 4u);
  for (const char* metric : {"min_grad_norm_sq", "grad_norm_sq", "tracking_error", "mc_variance"}) {
    EXPECT_TRUE(fs::exists(dir / ("bands_" + std::string(metric) + ".csv")));
    EXPECT_TRUE(fs::exists(dir / (std::string(metric) + ".svg")));
  }
  EXPECT_TRUE(fs::exists(dir / "traces" / "nested_seed2.csv"));
  std::ifstream trace(dir / "traces" / "vanilla_seed0.csv");
  EXPECT_NO_THROW(read_trace_csv(trace));
  fs::remove_all(dir);
}

TEST(Experiment, PlanFromBudget) {
  auto c = preset("paper-garnet1");
  const auto nested = plan_algorithm(c, "nested");
  EXPECT_EQ(nested.samples_per_iter, 80u);
  EXPECT_EQ(nested.T, 150u);
  EXPECT_EQ(nested.eval_every, 1u);
  const auto mini = plan_algorithm(c, "minibatch");
  EXPECT_EQ(mini.T, 400u);
  EXPECT_EQ(mini.eval_every, 4u);
  const auto vanilla = plan_algorithm(c, "vanilla");
  EXPECT_EQ(vanilla.T, 12000u);
  EXPECT_EQ(vanilla.eval_every, 120u);
}

TEST(Experiment, WorkerCountHonoursEnvironment) {
  const char* old = std::getenv("GGQ_THREADS");
  const std::string saved = old ? old : "";
  setenv("GGQ_THREADS", "3", 1);
  EXPECT_EQ(worker_count(10), 3u);
  EXPECT_EQ(worker_count(2), 2u);
  setenv("GGQ_THREADS", "junk", 1);
  EXPECT_GE(worker_count(10), 1u);
  if (old) setenv("GGQ_THREADS", saved.c_str(), 1);
  else unsetenv("GGQ_THREADS");
}

TEST(Experiment, ParallelForRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(50, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
