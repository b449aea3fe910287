#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ggq/ggq.hpp"

namespace {

using nlohmann::json;

nlohmann::ordered_json report_json(const ggq::AssumptionReport& r) {
  nlohmann::ordered_json doc;
  doc["lambda_min"] = r.lambda_min;
  doc["max_feature_norm"] = r.max_feature_norm;
  doc["k1"] = r.k1;
  doc["k2"] = r.k2;
  doc["rho_hat"] = r.rho_hat;
  doc["assumptions"] = {{"solvable", r.solvable},
                        {"bounded_features", r.bounded_features},
                        {"smooth_policy", r.smooth_policy},
                        {"ergodic", r.ergodic}};
  doc["mixing"] = r.mixing;
  if (!r.note.empty()) doc["note"] = r.note;
  return doc;
}

std::vector<std::uint64_t> horizons_from(const std::vector<double>& values) {
  std::vector<std::uint64_t> out;
  for (double v : values) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15)
      throw std::invalid_argument("--T: horizons must be positive integers, got " + ggq::format_real(v));
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy-GQ algorithms, exact oracle and benchmark harness"};
  app.set_version_flag("--version", std::string(ggq::kVersion));
  app.require_subcommand(1);

  // mdp garnet | frozenlake
  auto* mdp_cmd = app.add_subcommand("mdp", "Generate an MDP document")->require_subcommand(1);

  ggq::GarnetParams garnet;
  std::uint64_t garnet_seed = 1;
  double garnet_gamma = 0.95;
  std::string garnet_out;
  auto* garnet_cmd = mdp_cmd->add_subcommand("garnet", "Random Garnet MDP with features");
  garnet_cmd->add_option("--ns", garnet.n_states, "number of states")->required();
  garnet_cmd->add_option("--na", garnet.n_actions, "number of actions")->required();
  garnet_cmd->add_option("--b", garnet.branching, "branching factor")->required();
  garnet_cmd->add_option("--nf", garnet.n_features, "feature dimension")->required();
  garnet_cmd->add_option("--seed", garnet_seed, "generator seed");
  garnet_cmd->add_option("--gamma", garnet_gamma, "discount factor");
  garnet_cmd->add_option("--out", garnet_out, "output JSON file")->required();

  bool lake_slippery = false;
  std::size_t lake_nf = 4;
  std::uint64_t lake_seed = 1;
  double lake_gamma = 0.95;
  std::string lake_out;
  auto* lake_cmd = mdp_cmd->add_subcommand("frozenlake", "4x4 Frozen Lake with random features");
  lake_cmd->add_flag("--slippery", lake_slippery, "stochastic transitions");
  lake_cmd->add_option("--nf", lake_nf, "feature dimension");
  lake_cmd->add_option("--seed", lake_seed, "feature seed");
  lake_cmd->add_option("--gamma", lake_gamma, "discount factor");
  lake_cmd->add_option("--out", lake_out, "output JSON file")->required();

  // oracle check
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact-model diagnostics")->require_subcommand(1);
  std::string check_file;
  double check_sigma = 1.0;
  double check_radius = 10.0;
  std::size_t check_nf = 0;
  std::uint64_t check_seed = 1;
  std::size_t check_horizon = 50;
  auto* check_cmd = oracle_cmd->add_subcommand("check", "Report the standing assumptions as JSON");
  check_cmd->add_option("mdp", check_file, "MDP JSON file")->required();
  check_cmd->add_option("--sigma", check_sigma, "softmax temperature");
  check_cmd->add_option("--radius", check_radius, "projection radius R");
  check_cmd->add_option("--nf", check_nf, "random feature dimension when the file has no features");
  check_cmd->add_option("--seed", check_seed, "random feature seed");
  check_cmd->add_option("--horizon", check_horizon, "mixing probe horizon");

  // run
  std::string run_config;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
  run_cmd->add_option("--config", run_config, "config file (.toml or .json)")->required();
  run_cmd->add_option("--out", run_out, "artifact directory (default runs/<name>)");

  // bench
  std::string bench_preset;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Run a built-in preset");
  bench_cmd->add_option("--preset", bench_preset, "preset name")
      ->required()
      ->check(CLI::IsMember(ggq::preset_names()));
  bench_cmd->add_option("--out", bench_out, "artifact directory (default bench/<preset>)");

  // plot
  std::string plot_in;
  std::string plot_out;
  ggq::PlotStyle plot_style;
  auto* plot_cmd = app.add_subcommand("plot", "Render a band CSV as SVG");
  plot_cmd->add_option("--in", plot_in, "band CSV")->required();
  plot_cmd->add_option("--out", plot_out, "SVG file")->required();
  plot_cmd->add_option("--title", plot_style.title, "plot title");
  plot_cmd->add_option("--ylabel", plot_style.y_label, "y-axis label");

  // rates
  ggq::RateSweepConfig sweep;
  std::vector<double> sweep_T = {1e3, 3e3, 1e4, 3e4};
  ggq::GarnetParams sweep_garnet;
  std::uint64_t sweep_mdp_seed = 1;
  double sweep_gamma = 0.95;
  double sweep_sigma = 1.0;
  std::string sweep_sampler = "iid";
  auto* rates_cmd = app.add_subcommand("rates", "Horizon sweep and log-log rate fit on a Garnet MDP");
  rates_cmd->add_option("--algo", sweep.algorithm, "vanilla, minibatch or nested")
      ->check(CLI::IsMember({"vanilla", "minibatch", "nested"}));
  rates_cmd->add_option("--T", sweep_T, "comma-separated horizons")->delimiter(',');
  rates_cmd->add_option("--seeds", sweep.n_seeds, "seeds per horizon");
  rates_cmd->add_option("--seed", sweep.seed, "first seed");
  rates_cmd->add_option("--alpha0", sweep.steps.alpha0, "alpha = alpha0 / T^a");
  rates_cmd->add_option("--beta0", sweep.steps.beta0, "beta = beta0 / T^b");
  rates_cmd->add_option("--a", sweep.steps.a, "alpha exponent");
  rates_cmd->add_option("--b-exp", sweep.steps.b, "beta exponent");
  rates_cmd->add_option("--radius", sweep.radius, "projection radius R");
  rates_cmd->add_option("--sampler", sweep_sampler, "iid or markov")->check(CLI::IsMember({"iid", "markov"}));
  rates_cmd->add_option("--ns", sweep_garnet.n_states, "Garnet states");
  rates_cmd->add_option("--na", sweep_garnet.n_actions, "Garnet actions");
  rates_cmd->add_option("--b", sweep_garnet.branching, "Garnet branching factor");
  rates_cmd->add_option("--nf", sweep_garnet.n_features, "feature dimension");
  rates_cmd->add_option("--mdp-seed", sweep_mdp_seed, "Garnet seed");
  rates_cmd->add_option("--gamma", sweep_gamma, "discount factor");
  rates_cmd->add_option("--sigma", sweep_sigma, "softmax temperature");

  CLI11_PARSE(app, argc, argv);

  try {
    if (garnet_cmd->parsed()) {
      const auto inst = ggq::generate_garnet(garnet, garnet_seed, garnet_gamma);
      print_warnings(inst.warnings);
      ggq::write_file_atomic(garnet_out, ggq::mdp_to_json(inst.mdp, &inst.features).dump(2) + "\n");
    } else if (lake_cmd->parsed()) {
      const auto mdp = ggq::frozen_lake(lake_slippery, lake_gamma);
      const auto features = ggq::random_features(lake_nf, mdp.n_states(), mdp.n_actions(), lake_seed);
      ggq::write_file_atomic(lake_out, ggq::mdp_to_json(mdp, &features).dump(2) + "\n");
    } else if (check_cmd->parsed()) {
      const auto loaded = ggq::load_mdp(check_file);
      if (!loaded.features && check_nf == 0)
        throw ggq::SchemaError("mdp.features: missing (pass --nf to use random features)");
      const ggq::FeatureMap features =
          loaded.features ? *loaded.features
                          : ggq::random_features(check_nf, loaded.mdp.n_states(), loaded.mdp.n_actions(), check_seed);
      const ggq::SoftmaxSpec spec(check_sigma);
      const auto policy = ggq::uniform_behavior(loaded.mdp);
      const auto report = ggq::validate_assumptions(loaded.mdp, policy, features, spec, check_horizon);
      auto doc = report_json(report);
      if (report.solvable) {
        const auto c = ggq::lipschitz_constants(spec, loaded.mdp, check_radius, report.lambda_min);
        doc["radius"] = check_radius;
        doc["constants"] = {{"K", c.K},
                            {"k3", c.k3},
                            {"omega_star_lipschitz", c.w_star_lip},
                            {"g_omega_lipschitz", c.g_omega_lip}};
      }
      std::cout << doc.dump(2) << '\n';
      if (!(report.solvable && report.bounded_features && report.smooth_policy && report.ergodic)) return 3;
    } else if (run_cmd->parsed() || bench_cmd->parsed()) {
      const ggq::ExperimentConfig config =
          run_cmd->parsed() ? ggq::load_config(run_config) : ggq::preset(bench_preset);
      std::filesystem::path dir;
      if (run_cmd->parsed()) dir = run_out.empty() ? std::filesystem::path("runs") / config.name : std::filesystem::path(run_out);
      else dir = bench_out.empty() ? std::filesystem::path("bench") / config.name : std::filesystem::path(bench_out);
      const auto result = ggq::run_experiment(config, dir);
      print_warnings(result.warnings);
      std::cout << "wrote " << dir.string() << '\n';
      for (const auto& [metric, by_alg] : result.bands) {
        if (metric != "min_grad_norm_sq") continue;
        for (const auto& plan : result.plans) {
          const auto& band = by_alg.at(plan.name);
          std::cout << plan.name << ": median min_grad_norm_sq " << ggq::format_real(band.p50.back()) << " after "
                    << ggq::format_real(band.grid.back()) << " samples\n";
        }
      }
    } else if (plot_cmd->parsed()) {
      if (plot_style.title.empty()) plot_style.title = std::filesystem::path(plot_in).stem().string();
      ggq::plot(plot_in, plot_out, plot_style);
    } else if (rates_cmd->parsed()) {
      sweep.horizons = horizons_from(sweep_T);
      sweep.sampler = ggq::parse_sampler_kind(sweep_sampler);
      auto inst = ggq::generate_garnet(sweep_garnet, sweep_mdp_seed, sweep_gamma);
      print_warnings(inst.warnings);
      auto policy = ggq::uniform_behavior(inst.mdp);
      const ggq::Problem problem(std::move(inst.mdp), std::move(policy), std::move(inst.features),
                                 ggq::SoftmaxSpec(sweep_sigma));
      const auto result = ggq::run_rate_sweep(problem, sweep);
      std::cout << "T,mean_grad_norm_sq\n";
      for (const auto& p : result.points) std::cout << p.T << ',' << ggq::format_real(p.mean_grad_norm_sq) << '\n';
      std::printf("slope %.4f +- %.4f\n", result.fit.slope, result.fit.slope_stderr);
    }
  } catch (const ggq::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ggq::AssumptionViolated& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
