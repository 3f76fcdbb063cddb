//
// Copyright 2026 The Privalloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "privalloc/cli.hpp"

namespace {

using privalloc::cli::ConfigError;
using privalloc::cli::ExperimentConfig;

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override,
                             std::optional<std::size_t> trials_override,
                             const std::string& out_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  auto config = privalloc::cli::parse_config(in);
  if (seed_override) config.seed = *seed_override;
  if (trials_override) config.trials = *trials_override;
  if (!out_override.empty()) config.output = out_override;
  return config;
}

int cmd_generate(const ExperimentConfig& config) {
  auto point = privalloc::cli::expand_grid(config).front();
  auto world = privalloc::cli::detail::build_world(config, point, config.seed);
  std::ofstream out(config.output);
  if (!out) throw ConfigError("cannot open output file: " + config.output);
  privalloc::write_population_csv(out, world.pop);
  std::cout << "wrote " << world.pop.size() << " individuals in "
            << world.pop.unit_count() << " units to " << config.output << "\n"
            << "rho_bar = " << world.rho_bar << ", G = " << world.g << "\n";
  return 0;
}

int cmd_allocate(const ExperimentConfig& config) {
  auto grid = privalloc::cli::expand_grid(config);
  auto point = grid.front();
  auto world = privalloc::cli::detail::build_world(
      config, point, privalloc::derive_seed(config.seed, {0, 0, 0}));
  const auto& strat = config.strategies.front();
  std::optional<privalloc::cli::detail::TrainedModel> model;
  if (privalloc::cli::is_predictive(strat.name)) {
    model = privalloc::cli::detail::train_for_point(
        config, strat, point, privalloc::derive_seed(config.seed, {0, 0xC0FFEE, 0}));
  }
  auto result = privalloc::cli::detail::run_strategy(
      config, strat, point, world, model ? &*model : nullptr,
      privalloc::derive_seed(config.seed, {0, 0, 1}));
  auto report = privalloc::regret(result.alloc, world.pop,
                                  std::min(point.k, world.pop.size()));

  // Outcome CSV: individual, noisy score (raw welfare when the strategy adds
  // no score noise), treated bit.
  std::ofstream out(config.output);
  if (!out) throw ConfigError("cannot open output file: " + config.output);
  std::vector<char> treated(world.pop.size(), 0);
  for (std::size_t i : result.alloc.treated) treated[i] = 1;
  const std::vector<double>& scores =
      result.threshold_outcome ? result.threshold_outcome->noisy_welfare
                               : world.pop.welfare;
  out << "individual,noisy_welfare,treated\n";
  for (std::size_t i = 0; i < world.pop.size(); ++i) {
    out << i << ',' << privalloc::cli::detail::format_number(scores[i]) << ','
        << int(treated[i]) << '\n';
  }

  nlohmann::json sidecar;
  sidecar["strategy"] = strat.name;
  sidecar["P"] = world.pop.size();
  sidecar["M"] = world.pop.unit_count();
  sidecar["k"] = point.k;
  sidecar["psi"] = point.psi;
  sidecar["lambda"] = point.lambda;
  sidecar["beta"] = strat.beta;
  sidecar["seed"] = config.seed;
  sidecar["treated_count"] = result.alloc.treated.size();
  sidecar["value"] = report.value;
  sidecar["normalized_regret"] = report.normalized_regret;
  sidecar["log_base"] = privalloc::dp::kLogBase;
  if (result.bound) sidecar["bound"] = *result.bound;
  if (result.threshold_outcome) {
    sidecar["threshold"] = result.threshold_outcome->threshold;
    sidecar["margin"] = result.threshold_outcome->margin;
    sidecar["bins"] = result.threshold_outcome->bin_count;
    sidecar["margin_scale"] = strat.margin_scale;
  }
  std::ofstream meta(config.output + ".meta.json");
  meta << sidecar.dump(2) << "\n";

  std::cout << "treated " << result.alloc.treated.size() << " of "
            << world.pop.size() << "; normalized regret "
            << report.normalized_regret << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& config, unsigned parallel, bool gate) {
  std::ofstream out(config.output);
  if (!out) throw ConfigError("cannot open output file: " + config.output);
  auto summary = privalloc::cli::run_sweep(config, out, parallel);
  std::cout << privalloc::cli::summary_table(config, summary);
  if (gate && summary.any_gate_failed) return 2;
  return 0;
}

int cmd_regime(double g, double lambda, double rho_bar, std::size_t k,
               std::size_t population, std::optional<double> sigma,
               std::optional<double> l_star) {
  auto label = privalloc::budget::classify_regime_sampling(g, lambda, rho_bar,
                                                           k, population);
  std::cout << "inputs: G = " << g << ", rho_bar = " << rho_bar
            << ", k/P = " << double(k) / double(population)
            << ", lambda = " << lambda << "\n";
  std::cout << "sampling-cost regime: " << privalloc::budget::to_string(label.label)
            << "\n  lambda_low = " << label.lambda_low
            << "\n  lambda_high = " << label.lambda_high << "\n";
  if (sigma) {
    auto learn_label = privalloc::learn::classify_regime_learning(
        *sigma, k, population, g, rho_bar, l_star);
    std::cout << "learning regime: "
              << (learn_label.sigma_zero_flag
                      ? "sigma = 0 (perfectly predictable; individual targeting)"
                      : (learn_label.ula_dominant ? "unit-level dominant"
                                                  : "individual-level favorable"))
              << "\n  product = " << learn_label.product << " (threshold 0.5)\n";
    if (learn_label.general_lhs) {
      std::cout << "  general condition: " << *learn_label.general_lhs
                << " <= " << *learn_label.general_rhs
                << (*learn_label.general_lhs <= *learn_label.general_rhs
                        ? " (holds)"
                        : " (fails)")
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private aid allocation strategies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> trials_override;
  unsigned parallel = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_override, "output path (overrides config)");
    cmd->add_option("--seed", seed_override, "base seed (overrides config)");
    cmd->add_option("--trials", trials_override, "trial count (overrides config)");
    cmd->add_option("--parallel", parallel, "worker threads");
  };

  auto* generate = app.add_subcommand("generate", "emit a population CSV");
  add_common(generate, true);

  auto* allocate = app.add_subcommand("allocate", "run one allocation");
  add_common(allocate, true);

  auto* sweep = app.add_subcommand("sweep", "grid Monte Carlo sweep");
  add_common(sweep, true);

  auto* describe = app.add_subcommand("describe", "print the execution plan");
  add_common(describe, true);

  auto* check = app.add_subcommand("check-bounds",
                                   "sweep and fail on bound violations");
  add_common(check, true);

  auto* regime = app.add_subcommand("regime", "classify the cost regime");
  double g = 0.0, lambda = 0.0, rho_bar = 0.0;
  std::size_t k = 0, population = 0;
  std::optional<double> sigma, l_star, private_psi;
  bool have_g = false, have_rho = false;
  regime->add_option("--G", g, "Gini coefficient of the unit profile")
      ->each([&](const std::string&) { have_g = true; });
  regime->add_option("--lambda", lambda, "cost ratio")->required();
  regime->add_option("--rho-bar", rho_bar, "mean unit profile")
      ->each([&](const std::string&) { have_rho = true; });
  regime->add_option("--k", k, "aid budget")->required();
  regime->add_option("--P", population, "population size");
  regime->add_option("--sigma", sigma, "irreducible-risk level (learning regime)");
  regime->add_option("--l-star", l_star, "optimal in-class risk (learning regime)");
  regime->add_option("--config", config_path,
                     "population config (estimate G and rho_bar from data)");
  regime->add_option("--private-psi", private_psi,
                     "release the profile estimates under this zCDP budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(load_config(config_path, seed_override,
                                      trials_override, out_override));
    }
    if (allocate->parsed()) {
      return cmd_allocate(load_config(config_path, seed_override,
                                      trials_override, out_override));
    }
    if (sweep->parsed()) {
      return cmd_sweep(load_config(config_path, seed_override, trials_override,
                                   out_override),
                       parallel, /*gate=*/false);
    }
    if (check->parsed()) {
      return cmd_sweep(load_config(config_path, seed_override, trials_override,
                                   out_override),
                       parallel, /*gate=*/true);
    }
    if (describe->parsed()) {
      auto config = load_config(config_path, seed_override, trials_override,
                                out_override);
      std::cout << privalloc::cli::describe(config);
      return 0;
    }
    if (regime->parsed()) {
      if (!have_g || !have_rho) {
        if (config_path.empty()) {
          throw ConfigError("regime needs --G and --rho-bar, or --config");
        }
        auto config = load_config(config_path, seed_override, trials_override, "");
        auto point = privalloc::cli::expand_grid(config).front();
        auto world =
            privalloc::cli::detail::build_world(config, point, config.seed);
        auto profile = privalloc::unit_profile(world.pop);
        if (private_psi) {
          // Released once under the given budget: vector Gaussian mechanism at
          // replace-one sensitivity 1/N, clamped to [0, 1].
          privalloc::Rng rng(privalloc::derive_seed(config.seed, {0xD9}));
          double sens = 1.0 / double(world.pop.min_unit_size());
          for (double& r : profile.rho) {
            r = std::clamp(
                privalloc::dp::gaussian_mechanism(r, sens, *private_psi, rng),
                0.0, 1.0);
          }
        }
        rho_bar = profile.rho_bar_m();
        g = rho_bar > 0.0 ? privalloc::gini(profile) : 0.0;
        population = world.pop.size();
        std::cout << (private_psi ? "privatized" : "measured")
                  << " profile statistics from " << config.population.generator
                  << " population\n";
      }
      if (population == 0) throw ConfigError("regime needs --P");
      return cmd_regime(g, lambda, rho_bar, k, population, sigma, l_star);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
