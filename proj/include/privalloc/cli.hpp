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

#ifndef PRIVALLOC_CLI_HPP_
#define PRIVALLOC_CLI_HPP_

#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "privalloc/alloc.hpp"
#include "privalloc/budget.hpp"
#include "privalloc/core.hpp"
#include "privalloc/learn.hpp"
#include "privalloc/synth.hpp"

namespace privalloc::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strategy entries. `params` selects the individual-level parameter family
// (stochastic or adversarial); predictive strategies train on n_train fresh
// draws at the grid point's psi.
struct StrategyConfig {
  std::string name;
  double beta = 0.1;
  std::string params = "stochastic";
  double margin_scale = 1.0;
  std::size_t n_train = 2000;
  std::optional<std::size_t> kappa;
};

struct PopulationConfig {
  std::string generator = "two_point";
  std::size_t population = 0;
  std::size_t units = 1;
  double delta_w = 0.5;
  double a = 0.0;
  double b = 0.0;
  // two_point_eta (learning) family:
  double sigma = 0.4;
  std::size_t feature_dim = 4;
  std::size_t cells = 10;
};

struct SweepAxes {
  std::vector<double> psi;
  std::vector<double> lambda;
  std::vector<std::size_t> k;
  std::vector<double> g;
  std::vector<double> sigma;
};

struct ExperimentConfig {
  PopulationConfig population;
  std::vector<StrategyConfig> strategies;
  SweepAxes sweep;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t k = 0;  // default budget when the sweep has no k axis
  double psi = 1.0;   // default psi when the sweep has no psi axis
  double lambda = 0.0;
  std::string output = "sweep.csv";
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + s);
  }
}

inline std::size_t parse_count(const std::string& s, const std::string& key) {
  double v = parse_double(s, key);
  if (v < 0 || v != std::floor(v)) {
    throw ConfigError("expected a non-negative integer for '" + key + "': " + s);
  }
  return static_cast<std::size_t>(v);
}

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

}  // namespace detail

// Flat key-value text with repeated `section { ... }` blocks. `#` starts a
// comment; values in sweep blocks may be comma-separated lists.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::string section;
  bool saw_population = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.back() == '{') {
      if (!section.empty()) throw ConfigError("nested section at line " + std::to_string(lineno));
      section = detail::trim(line.substr(0, line.size() - 1));
      if (section == "population") {
        saw_population = true;
      } else if (section == "strategy") {
        config.strategies.emplace_back();
      } else if (section != "sweep") {
        throw ConfigError("unknown section '" + section + "' at line " + std::to_string(lineno));
      }
      continue;
    }
    if (line == "}") {
      if (section.empty()) throw ConfigError("unmatched '}' at line " + std::to_string(lineno));
      section.clear();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at line " + std::to_string(lineno));
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("empty key or value at line " + std::to_string(lineno));
    }

    if (section.empty()) {
      if (key == "trials") config.trials = detail::parse_count(value, key);
      else if (key == "seed") config.seed = static_cast<std::uint64_t>(detail::parse_count(value, key));
      else if (key == "k") config.k = detail::parse_count(value, key);
      else if (key == "psi") config.psi = detail::parse_double(value, key);
      else if (key == "lambda") config.lambda = detail::parse_double(value, key);
      else if (key == "output") config.output = value;
      else throw ConfigError("unknown top-level key '" + key + "'");
    } else if (section == "population") {
      auto& p = config.population;
      if (key == "generator") p.generator = value;
      else if (key == "P") p.population = detail::parse_count(value, key);
      else if (key == "M") p.units = detail::parse_count(value, key);
      else if (key == "delta_w") p.delta_w = detail::parse_double(value, key);
      else if (key == "a") p.a = detail::parse_double(value, key);
      else if (key == "b") p.b = detail::parse_double(value, key);
      else if (key == "sigma") p.sigma = detail::parse_double(value, key);
      else if (key == "p") p.feature_dim = detail::parse_count(value, key);
      else if (key == "cells") p.cells = detail::parse_count(value, key);
      else throw ConfigError("unknown population key '" + key + "'");
    } else if (section == "strategy") {
      if (config.strategies.empty()) throw ConfigError("strategy key outside block");
      auto& s = config.strategies.back();
      if (key == "name") s.name = value;
      else if (key == "beta") s.beta = detail::parse_double(value, key);
      else if (key == "params") s.params = value;
      else if (key == "margin_scale") s.margin_scale = detail::parse_double(value, key);
      else if (key == "n_train") s.n_train = detail::parse_count(value, key);
      else if (key == "kappa") s.kappa = detail::parse_count(value, key);
      else throw ConfigError("unknown strategy key '" + key + "'");
    } else {  // sweep
      auto items = detail::split_list(value);
      if (items.empty()) throw ConfigError("empty sweep list for '" + key + "'");
      if (key == "psi") {
        for (auto& v : items) config.sweep.psi.push_back(detail::parse_double(v, key));
      } else if (key == "lambda") {
        for (auto& v : items) config.sweep.lambda.push_back(detail::parse_double(v, key));
      } else if (key == "k") {
        for (auto& v : items) config.sweep.k.push_back(detail::parse_count(v, key));
      } else if (key == "G") {
        for (auto& v : items) config.sweep.g.push_back(detail::parse_double(v, key));
      } else if (key == "sigma") {
        for (auto& v : items) config.sweep.sigma.push_back(detail::parse_double(v, key));
      } else {
        throw ConfigError("unknown sweep axis '" + key + "'");
      }
    }
  }
  if (!section.empty()) throw ConfigError("unterminated section '" + section + "'");
  if (!saw_population) throw ConfigError("missing population block");
  if (config.strategies.empty()) throw ConfigError("at least one strategy block is required");
  for (const auto& s : config.strategies) {
    if (s.name.empty()) throw ConfigError("strategy block without a name");
  }
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.population.population == 0) throw ConfigError("population P must be positive");
  return config;
}

inline const std::vector<std::string>& known_strategies() {
  static const std::vector<std::string> names = {
      "rand",          "ila",
      "ula",           "ila_private",
      "ula_private",   "ula_private_membership",
      "ila_sampling",  "ila_sampling_private",
      "ula_sampling_private", "ila_predictive",
      "ula_predictive"};
  return names;
}

inline bool is_predictive(const std::string& name) {
  return name == "ila_predictive" || name == "ula_predictive";
}

inline void validate_strategies(const ExperimentConfig& config) {
  for (const auto& s : config.strategies) {
    const auto& names = known_strategies();
    if (std::find(names.begin(), names.end(), s.name) == names.end()) {
      throw ConfigError("unknown strategy '" + s.name + "'");
    }
    if (is_predictive(s.name) && config.population.generator != "two_point_eta") {
      throw ConfigError("strategy '" + s.name +
                        "' requires the two_point_eta population generator");
    }
  }
  if (!config.sweep.g.empty() && config.population.generator != "gini_target") {
    throw ConfigError("a G sweep axis requires the gini_target generator");
  }
  if (!config.sweep.sigma.empty() && config.population.generator != "two_point_eta") {
    throw ConfigError("a sigma sweep axis requires the two_point_eta generator");
  }
}

struct GridPoint {
  std::size_t index = 0;
  double psi = 1.0;
  double lambda = 0.0;
  std::size_t k = 0;
  std::optional<double> g;
  std::optional<double> sigma;
};

inline std::vector<GridPoint> expand_grid(const ExperimentConfig& config) {
  auto psis = config.sweep.psi.empty() ? std::vector<double>{config.psi}
                                       : config.sweep.psi;
  auto lambdas = config.sweep.lambda.empty() ? std::vector<double>{config.lambda}
                                             : config.sweep.lambda;
  auto ks = config.sweep.k.empty() ? std::vector<std::size_t>{config.k}
                                   : config.sweep.k;
  std::vector<std::optional<double>> gs, sigmas;
  if (config.sweep.g.empty()) {
    gs.push_back(std::nullopt);
  } else {
    for (double g : config.sweep.g) gs.emplace_back(g);
  }
  if (config.sweep.sigma.empty()) {
    sigmas.push_back(std::nullopt);
  } else {
    for (double s : config.sweep.sigma) sigmas.emplace_back(s);
  }
  std::vector<GridPoint> grid;
  for (double psi : psis) {
    for (double lambda : lambdas) {
      for (std::size_t k : ks) {
        for (auto& g : gs) {
          for (auto& sigma : sigmas) {
            GridPoint point;
            point.index = grid.size();
            point.psi = psi;
            point.lambda = lambda;
            point.k = k;
            point.g = g;
            point.sigma = sigma;
            grid.push_back(point);
          }
        }
      }
    }
  }
  return grid;
}

// --- sweep execution ---

struct TrialRow {
  std::string strategy;
  std::size_t population = 0;
  std::size_t units = 0;
  std::size_t k = 0;
  double lambda = 0.0;
  double psi = 0.0;
  double g = 0.0;
  double rho_bar = 0.0;
  double regret_value = 0.0;
  double normalized_regret = 0.0;
  std::optional<double> bound;
};

struct CellSummary {
  std::size_t grid_index = 0;
  std::string strategy;
  std::size_t trials = 0;
  double mean_regret = 0.0;
  double mean_normalized = 0.0;
  double se_normalized = 0.0;
  double mean_bound = 0.0;
  bool has_bound = false;
  std::size_t violations = 0;
  // Gate for strategies whose bound is a per-trial high-probability claim.
  std::optional<double> gate_beta;
  bool gate_failed = false;
};

struct SweepSummary {
  std::vector<CellSummary> cells;
  bool any_gate_failed = false;
  std::size_t rows = 0;
};

namespace detail {

// The symmetric two-point family with irreducible risk sigma^2:
// eta = 0.5 -+ sqrt(0.25 - sigma^2).
inline learn::SyntheticDistribution sigma_family(double sigma,
                                                 std::size_t feature_dim) {
  if (!(sigma >= 0.0 && sigma <= 0.5)) {
    throw ConfigError("sigma must lie in [0, 0.5]");
  }
  double d = std::sqrt(std::max(0.0, 0.25 - sigma * sigma));
  learn::SyntheticDistribution dist;
  dist.eta_low = 0.5 - d;
  dist.eta_high = 0.5 + d;
  dist.dim = feature_dim;
  return dist;
}

struct World {
  Population pop;
  UnitProfile profile;
  double rho_bar = 0.0;
  double g = 0.0;
  std::optional<learn::LearnPopulation> learn_pop;
};

inline World build_world(const ExperimentConfig& config, const GridPoint& point,
                         std::uint64_t seed) {
  World world;
  const auto& pc = config.population;
  if (pc.generator == "two_point_eta") {
    double sigma = point.sigma.value_or(pc.sigma);
    auto dist = sigma_family(sigma, pc.feature_dim);
    world.learn_pop = learn::sample_learn_population(dist, pc.population,
                                                     pc.cells, seed);
    world.pop = world.learn_pop->pop;
  } else {
    synth::PopulationSpec spec;
    spec.population = pc.population;
    spec.units = pc.units;
    spec.delta_w = pc.delta_w;
    spec.generator = synth::generator_from_name(pc.generator);
    spec.param_a = point.g.value_or(pc.a);
    spec.param_b = pc.b;
    spec.seed = seed;
    world.pop = synth::generate(spec).pop;
  }
  world.profile = unit_profile(world.pop);
  world.rho_bar = world.profile.rho_bar_m();
  world.g = world.rho_bar > 0.0 ? gini(world.profile) : 0.0;
  return world;
}

struct TrainedModel {
  learn::LinearModel model;
  double alpha = 0.0;  // measured squared-loss risk
};

// One model per (grid point, strategy); allocation trials reuse it. Training
// data is drawn fresh from the distribution, disjoint from every allocation
// population by construction.
inline TrainedModel train_for_point(const ExperimentConfig& config,
                                    const StrategyConfig& strat,
                                    const GridPoint& point,
                                    std::uint64_t seed) {
  const auto& pc = config.population;
  auto dist = sigma_family(point.sigma.value_or(pc.sigma), pc.feature_dim);
  learn::LearnerSpec spec;
  spec.dim = pc.feature_dim;
  spec.lipschitz = 1.0;
  spec.diameter = 2.0;
  Rng rng(derive_seed(seed, {1}));
  std::vector<learn::LabeledExample> data;
  data.reserve(strat.n_train);
  for (std::size_t i = 0; i < strat.n_train; ++i) {
    auto s = dist.draw(rng);
    data.push_back({std::move(s.features), s.label});
  }
  TrainedModel out;
  out.model = learn::private_learner_train(data, spec, point.psi,
                                           derive_seed(seed, {2}));
  out.alpha = learn::risk_decompose(out.model, dist, 50000, derive_seed(seed, {3}))
                  .measured_total;
  return out;
}

struct StrategyResult {
  Allocation alloc;
  std::optional<double> bound;
  std::optional<double> gate_beta;
  // Threshold-mechanism metadata when the strategy runs through it.
  std::optional<alloc::IlaOutcome> threshold_outcome;
};

inline double eta_bar_lowest(const std::vector<double>& eta, std::size_t count) {
  if (count == 0) return 0.0;
  std::vector<double> sorted = eta;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < count && i < sorted.size(); ++i) acc += sorted[i];
  return acc / double(std::min(count, sorted.size()));
}

inline StrategyResult run_strategy(const ExperimentConfig& config,
                                   const StrategyConfig& strat,
                                   const GridPoint& point, const World& world,
                                   const TrainedModel* model,
                                   std::uint64_t seed) {
  const auto& pop = world.pop;
  const std::size_t p = pop.size();
  const std::size_t k = std::min(point.k, p);
  const std::size_t m = pop.unit_count();
  const std::size_t n_unit = pop.min_unit_size();
  const std::size_t big_k = n_unit > 0 ? (k + n_unit - 1) / n_unit : 1;
  StrategyResult result;

  if (strat.name == "rand") {
    result.alloc = random_allocation(pop, k, seed);
  } else if (strat.name == "ila") {
    result.alloc = alloc::ila_nonprivate(pop, k);
    result.bound = 0.0;
  } else if (strat.name == "ula") {
    result.alloc = alloc::ula_nonprivate(pop, k, seed).treated;
    result.bound = double(k) * world.profile.rho_bar_k(std::min<std::size_t>(big_k, m));
  } else if (strat.name == "ila_private") {
    alloc::IlaParams params =
        strat.params == "adversarial"
            ? alloc::ila_params_adversarial(p, k, point.psi, strat.beta)
            : alloc::ila_params_stochastic(p, k, point.psi, strat.beta);
    params.margin_scale = strat.margin_scale;
    auto outcome = alloc::ila_private(pop, params, seed);
    result.alloc = outcome.treated;
    result.threshold_outcome = std::move(outcome);
    // Per-trial rows carry the finite-population high-probability bound; the
    // asymptotic forms are mean-level statements at this scale and are
    // checked against means by the acceptance suite.
    double bin_prob = strat.params == "adversarial"
                          ? params.theta / (2.0 * params.s)
                          : params.theta;  // unit-density welfare
    result.bound = alloc::ila_shortfall_bound(params, p, bin_prob);
    result.gate_beta = strat.beta;
  } else if (strat.name == "ula_private") {
    result.alloc =
        alloc::ula_private_public_membership(pop, k, point.psi, seed).treated;
    result.bound =
        double(k) * world.profile.rho_bar_k(std::min<std::size_t>(big_k, m)) +
        alloc::ula_bound_privacy_term(m, n_unit, k, p, point.psi, strat.beta);
    result.gate_beta = strat.beta;
  } else if (strat.name == "ula_private_membership") {
    double c = alloc::ula_noise_constant(p, m, k);
    auto [psi1, psi2] = alloc::psi_split(p, double(n_unit), c, point.psi);
    auto outcome = alloc::ula_private_private_membership(pop, k, psi1, psi2,
                                                         strat.beta, seed);
    result.alloc = outcome.treated;
    result.threshold_outcome = std::move(outcome);
    result.bound =
        double(k) * world.profile.rho_bar_k(std::min<std::size_t>(big_k, m)) +
        alloc::ula_private_membership_bound(p, double(n_unit), c, point.psi);
  } else if (strat.name == "ila_sampling") {
    budget::SamplingEconomy econ{point.lambda, k, p};
    result.alloc = budget::ila_with_sampling(pop, econ, seed, strat.kappa);
    result.bound = budget::ila_sampling_upper_bound(p, k, point.lambda);
  } else if (strat.name == "ila_sampling_private") {
    budget::SamplingEconomy econ{point.lambda, k, p};
    result.alloc =
        budget::ila_with_sampling_private(pop, econ, point.psi, strat.beta, seed);
    result.bound =
        budget::ila_sampling_private_bound(p, k, point.lambda, point.psi, strat.beta);
    result.gate_beta = strat.beta;
  } else if (strat.name == "ula_sampling_private") {
    auto plan = budget::ula_sampling_plan(p, m, k, point.lambda, point.psi);
    bool feasible = plan.n >= m &&
                    static_cast<std::size_t>(std::ceil(point.lambda * plan.n)) < k;
    if (!feasible) {
      // The stratified plan cannot be afforded; no unit statistics can be
      // bought, so fall back to random allocation with no bound claim.
      result.alloc = random_allocation(pop, k, seed);
    } else {
      auto out = budget::ula_with_sampling_private(pop, k, point.lambda,
                                                   point.psi, seed);
      result.alloc = out.treated;
      result.bound = budget::ula_sampling_bound(
          p, m, n_unit, k, point.lambda, plan.n, point.psi,
          world.profile.rho_bar_k(std::min<std::size_t>(big_k, m)),
          world.rho_bar, world.g);
    }
  } else if (strat.name == "ila_predictive") {
    if (!world.learn_pop || !model) throw ConfigError("ila_predictive needs a learning world");
    result.alloc = learn::ila_predictive(*world.learn_pop, model->model, k,
                                         point.psi, strat.beta, seed);
    double eta_bar = eta_bar_lowest(world.learn_pop->eta, k);
    result.bound = learn::ila_prediction_bound_whp(k, k, eta_bar, model->alpha,
                                                   p, strat.beta);
    result.gate_beta = strat.beta;
  } else if (strat.name == "ula_predictive") {
    if (!world.learn_pop || !model) throw ConfigError("ula_predictive needs a learning world");
    double c = alloc::ula_noise_constant(p, m, k);
    double psi1 = point.psi, psi2 = point.psi;
    if (!std::isinf(point.psi)) {
      std::tie(psi1, psi2) = alloc::psi_split(p, double(n_unit), c, point.psi);
    }
    result.alloc = learn::ula_predictive(*world.learn_pop, model->model, k, psi1,
                                         psi2, strat.beta, seed);
    double sigma = point.sigma.value_or(config.population.sigma);
    result.bound = learn::ula_prediction_bound(
        k, world.profile.rho_bar_k(std::min<std::size_t>(big_k, m)), p,
        world.learn_pop->cells, model->alpha, sigma * sigma);
  } else {
    throw ConfigError("unknown strategy '" + strat.name + "'");
  }
  return result;
}

}  // namespace detail

inline constexpr const char* kCsvVersionComment = "# privalloc-csv v1";
inline constexpr const char* kCsvHeader =
    "strategy,P,M,k,lambda,psi,G,rho_bar,regret,normalized_regret,bound";

// Runs the full grid x trials x strategies product. Rows are emitted in
// deterministic (grid, trial, strategy) order no matter how many workers run;
// trial t at grid point g draws every seed from derive_seed(base, {g, t, ...}).
inline SweepSummary run_sweep(const ExperimentConfig& config, std::ostream& csv,
                              unsigned parallel = 1) {
  validate_strategies(config);
  auto grid = expand_grid(config);
  if (grid.empty()) throw ConfigError("empty sweep grid");
  const std::size_t trials = config.trials;
  const std::size_t n_strategies = config.strategies.size();

  // Models are per (grid point, strategy), shared across trials.
  std::vector<std::optional<detail::TrainedModel>> models(grid.size() *
                                                          n_strategies);
  for (const auto& point : grid) {
    for (std::size_t s = 0; s < n_strategies; ++s) {
      if (is_predictive(config.strategies[s].name)) {
        models[point.index * n_strategies + s] = detail::train_for_point(
            config, config.strategies[s], point,
            derive_seed(config.seed, {point.index, 0xC0FFEE, s}));
      }
    }
  }

  const std::size_t n_tasks = grid.size() * trials;
  std::vector<std::vector<TrialRow>> rows(n_tasks);
  std::atomic<std::size_t> next_task{0};
  std::exception_ptr worker_error;
  std::mutex error_mutex;
  auto run_tasks = [&]() {
    for (;;) {
      std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const auto& point = grid[task / trials];
      const std::size_t trial = task % trials;
      auto world = detail::build_world(
          config, point, derive_seed(config.seed, {point.index, trial, 0}));
      auto& out = rows[task];
      out.reserve(n_strategies);
      for (std::size_t s = 0; s < n_strategies; ++s) {
        const auto& strat = config.strategies[s];
        const auto* model_ptr =
            models[point.index * n_strategies + s].has_value()
                ? &*models[point.index * n_strategies + s]
                : nullptr;
        auto result = detail::run_strategy(
            config, strat, point, world, model_ptr,
            derive_seed(config.seed, {point.index, trial, 1 + s}));
        auto report =
            regret(result.alloc, world.pop, std::min(point.k, world.pop.size()));
        TrialRow row;
        row.strategy = strat.name;
        row.population = world.pop.size();
        row.units = world.pop.unit_count();
        row.k = point.k;
        row.lambda = point.lambda;
        row.psi = point.psi;
        row.g = world.g;
        row.rho_bar = world.rho_bar;
        row.regret_value = report.regret;
        row.normalized_regret = report.normalized_regret;
        row.bound = result.bound;
        out.push_back(std::move(row));
      }
    }
  };
  auto worker = [&]() noexcept {
    try {
      run_tasks();
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!worker_error) worker_error = std::current_exception();
    }
  };
  if (parallel <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < parallel; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (worker_error) std::rethrow_exception(worker_error);

  csv << kCsvVersionComment << '\n' << kCsvHeader << '\n';
  SweepSummary summary;
  std::vector<CellSummary> cells(grid.size() * n_strategies);
  std::vector<double> sumsq(cells.size(), 0.0);
  for (std::size_t task = 0; task < n_tasks; ++task) {
    const std::size_t grid_index = task / trials;
    for (std::size_t s = 0; s < rows[task].size(); ++s) {
      const auto& row = rows[task][s];
      csv << row.strategy << ',' << row.population << ',' << row.units << ','
          << row.k << ',' << detail::format_number(row.lambda) << ','
          << detail::format_number(row.psi) << ','
          << detail::format_number(row.g) << ','
          << detail::format_number(row.rho_bar) << ','
          << detail::format_number(row.regret_value) << ','
          << detail::format_number(row.normalized_regret) << ',';
      if (row.bound) csv << detail::format_number(*row.bound);
      csv << '\n';
      ++summary.rows;

      auto& cell = cells[grid_index * n_strategies + s];
      cell.grid_index = grid_index;
      cell.strategy = row.strategy;
      ++cell.trials;
      cell.mean_regret += row.regret_value;
      cell.mean_normalized += row.normalized_regret;
      sumsq[grid_index * n_strategies + s] +=
          row.normalized_regret * row.normalized_regret;
      if (row.bound) {
        cell.has_bound = true;
        cell.mean_bound += *row.bound;
        if (row.normalized_regret > *row.bound + 1e-9) ++cell.violations;
      }
    }
  }
  // Gate betas are per-strategy constants; recover them from the config.
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t s = 0; s < n_strategies; ++s) {
      auto& cell = cells[g * n_strategies + s];
      const auto& name = config.strategies[s].name;
      bool whp = name == "ila_private" || name == "ula_private" ||
                 name == "ila_sampling_private" || name == "ila_predictive";
      if (whp && cell.has_bound) cell.gate_beta = config.strategies[s].beta;
      if (cell.trials > 0) {
        cell.mean_regret /= double(cell.trials);
        cell.mean_normalized /= double(cell.trials);
        double var = std::max(0.0, sumsq[g * n_strategies + s] / double(cell.trials) -
                                       cell.mean_normalized * cell.mean_normalized);
        cell.se_normalized = std::sqrt(var / double(cell.trials));
        if (cell.has_bound) cell.mean_bound /= double(cell.trials);
      }
      if (cell.gate_beta) {
        double rate = double(cell.violations) / double(cell.trials);
        double se = std::sqrt(*cell.gate_beta * (1.0 - *cell.gate_beta) /
                              double(cell.trials));
        cell.gate_failed = rate > *cell.gate_beta + 3.0 * se;
        summary.any_gate_failed = summary.any_gate_failed || cell.gate_failed;
      }
    }
  }
  summary.cells = std::move(cells);
  return summary;
}

inline std::string summary_table(const ExperimentConfig& config,
                                 const SweepSummary& summary) {
  auto grid = expand_grid(config);
  std::ostringstream out;
  out << "grid cells: " << grid.size() << ", strategies: "
      << config.strategies.size() << ", rows: " << summary.rows << "\n";
  out << "cell strategy trials mean_norm_regret mean_bound violation_rate gate\n";
  for (const auto& cell : summary.cells) {
    out << cell.grid_index << ' ' << cell.strategy << ' ' << cell.trials << ' '
        << detail::format_number(cell.mean_normalized) << ' ';
    if (cell.has_bound) {
      out << detail::format_number(cell.mean_bound) << ' '
          << detail::format_number(double(cell.violations) /
                                   double(std::max<std::size_t>(1, cell.trials)));
    } else {
      out << "- -";
    }
    out << ' ';
    if (cell.gate_beta) {
      out << (cell.gate_failed ? "FAIL" : "ok");
    } else {
      out << '-';
    }
    out << '\n';
  }
  return out.str();
}

// Human-readable execution plan; deterministic for golden-file testing.
inline std::string describe(const ExperimentConfig& config) {
  validate_strategies(config);
  auto grid = expand_grid(config);
  std::ostringstream out;
  out << "population: generator=" << config.population.generator
      << " P=" << config.population.population
      << " M=" << config.population.units
      << " delta_w=" << detail::format_number(config.population.delta_w) << "\n";
  auto axis = [&](const char* name, std::size_t n) {
    out << "  " << name << ": " << n << " value" << (n == 1 ? "" : "s") << "\n";
  };
  out << "sweep axes:\n";
  axis("psi", config.sweep.psi.empty() ? 1 : config.sweep.psi.size());
  axis("lambda", config.sweep.lambda.empty() ? 1 : config.sweep.lambda.size());
  axis("k", config.sweep.k.empty() ? 1 : config.sweep.k.size());
  axis("G", config.sweep.g.empty() ? 1 : config.sweep.g.size());
  axis("sigma", config.sweep.sigma.empty() ? 1 : config.sweep.sigma.size());
  out << "grid cells: " << grid.size() << "\n";
  out << "trials per cell: " << config.trials << "\n";
  out << "strategies:\n";
  for (const auto& s : config.strategies) {
    out << "  " << s.name;
    if (s.name == "ila_private") {
      out << " (bound: finite-population high-probability shortfall, "
          << s.params << " parameters)";
    } else if (s.name == "ula_private") {
      out << " (bound: unit baseline + three-way-min privacy term)";
    } else if (s.name == "ula_private_membership") {
      out << " (bound: unit baseline + split-budget privacy term)";
    } else if (s.name == "ila_sampling") {
      out << " (bound: sampling upper bound)";
    } else if (s.name == "ila_sampling_private") {
      out << " (bound: private sampling bound)";
    } else if (s.name == "ula_sampling_private") {
      out << " (bound: stratified sampling bound)";
    } else if (s.name == "ila_predictive") {
      out << " (bound: prediction-ranked individual bound)";
    } else if (s.name == "ula_predictive") {
      out << " (bound: prediction-ranked unit bound)";
    } else if (s.name == "ula") {
      out << " (bound: k * rho_bar_K)";
    } else if (s.name == "ila") {
      out << " (bound: 0)";
    }
    out << "\n";
  }
  std::size_t runs = grid.size() * config.trials * config.strategies.size();
  out << "total runs: " << runs << "\n";
  out << "csv rows: " << runs << "\n";
  return out.str();
}

}  // namespace privalloc::cli

#endif  // PRIVALLOC_CLI_HPP_
