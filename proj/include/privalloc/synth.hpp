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

#ifndef PRIVALLOC_SYNTH_HPP_
#define PRIVALLOC_SYNTH_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "privalloc/budget.hpp"
#include "privalloc/core.hpp"
#include "privalloc/rng.hpp"

namespace privalloc::synth {

enum class Generator { kTwoPoint, kBetaUnits, kGiniTarget, kHardInstance };

inline Generator generator_from_name(const std::string& name) {
  if (name == "two_point") return Generator::kTwoPoint;
  if (name == "beta_units") return Generator::kBetaUnits;
  if (name == "gini_target") return Generator::kGiniTarget;
  if (name == "hard_instance") return Generator::kHardInstance;
  throw std::invalid_argument("unknown population generator: " + name);
}

// Generator parameters:
//   two_point:     param_a = fraction of low-welfare individuals per unit
//   beta_units:    rho_j ~ Beta(param_a, param_b)
//   gini_target:   param_a = target Gini, param_b = target rho_bar
//   hard_instance: param_a = number of high-welfare individuals (binary w)
struct PopulationSpec {
  std::size_t population = 0;
  std::size_t units = 1;
  double delta_w = 0.5;
  Generator generator = Generator::kTwoPoint;
  double param_a = 0.0;
  double param_b = 0.0;
  std::uint64_t seed = 0;

  std::size_t unit_size() const {
    if (units == 0 || population % units != 0) {
      throw std::invalid_argument("PopulationSpec: P must equal M * N");
    }
    return population / units;
  }
};

struct GeneratedPopulation {
  Population pop;
  UnitProfile profile;   // realized per-unit fractions
  double rho_bar = 0.0;
  double gini_coefficient = 0.0;  // 0 when undefined (all-zero profile)
};

// Evenly spaced unit profile hitting a target Gini at a given mean:
// rho_(j) = rho_bar + 3 M rho_bar G (2j - M - 1) / (M^2 - 1), clamped to
// [0,1] with the mean restored afterwards. Exact when no clamping occurs.
inline UnitProfile gini_targeted_profile(std::size_t units, double target_gini,
                                         double rho_bar) {
  if (units < 2) throw std::invalid_argument("gini_targeted_profile: M < 2");
  if (!(target_gini >= 0.0 && target_gini < 1.0)) {
    throw std::invalid_argument("gini_targeted_profile: G outside [0, 1)");
  }
  if (!(rho_bar > 0.0 && rho_bar <= 1.0)) {
    throw std::invalid_argument("gini_targeted_profile: rho_bar outside (0, 1]");
  }
  const double m = static_cast<double>(units);
  UnitProfile profile;
  profile.rho.resize(units);
  const double slope = 3.0 * m * rho_bar * target_gini / (m * m - 1.0);
  for (std::size_t j = 1; j <= units; ++j) {
    profile.rho[j - 1] = rho_bar + slope * (2.0 * j - m - 1.0);
  }
  // Clamp and restore the mean by shifting the still-free entries.
  for (int pass = 0; pass < 8; ++pass) {
    double excess = 0.0;
    std::size_t free_count = 0;
    for (double& r : profile.rho) {
      if (r < 0.0) {
        excess += r;
        r = 0.0;
      } else if (r > 1.0) {
        excess += r - 1.0;
        r = 1.0;
      }
    }
    for (double r : profile.rho) {
      if (r > 0.0 && r < 1.0) ++free_count;
    }
    if (excess == 0.0) break;
    if (free_count == 0) break;
    double shift = excess / static_cast<double>(free_count);
    for (double& r : profile.rho) {
      if (r > 0.0 && r < 1.0) r += shift;
    }
  }
  double achieved = gini(profile);
  if (std::abs(achieved - target_gini) > 0.02) {
    throw std::invalid_argument(
        "gini_targeted_profile: target infeasible after clamping");
  }
  return profile;
}

// Realizes a unit profile as welfare values: exactly round(rho_j * N)
// high-welfare members per unit. Highs get 1 - delta_w + u * delta_w,
// lows (1 - delta_w) * u, with u uniform in (0, 1], so the realized profile
// matches the target exactly rather than stochastically.
inline Population population_from_profile(const UnitProfile& profile,
                                          std::size_t unit_size, double delta_w,
                                          Rng& rng) {
  std::vector<double> welfare;
  welfare.reserve(profile.units() * unit_size);
  for (double r : profile.rho) {
    auto highs = static_cast<std::size_t>(std::lround(r * unit_size));
    for (std::size_t i = 0; i < unit_size; ++i) {
      double u = rng.uniform_pos();
      if (i < unit_size - highs) {
        welfare.push_back((1.0 - delta_w) * u);
      } else {
        welfare.push_back(1.0 - delta_w + u * delta_w);
      }
    }
  }
  return Population::with_uniform_units(
      std::move(welfare), static_cast<std::uint32_t>(profile.units()), delta_w);
}

inline GeneratedPopulation generate(const PopulationSpec& spec) {
  const std::size_t n = spec.unit_size();
  Rng rng(spec.seed);
  GeneratedPopulation out;
  switch (spec.generator) {
    case Generator::kTwoPoint: {
      if (!(spec.param_a >= 0.0 && spec.param_a <= 1.0)) {
        throw std::invalid_argument("two_point: low fraction outside [0, 1]");
      }
      UnitProfile target;
      target.rho.assign(spec.units, 1.0 - spec.param_a);
      out.pop = population_from_profile(target, n, spec.delta_w, rng);
      break;
    }
    case Generator::kBetaUnits: {
      if (!(spec.param_a > 0.0 && spec.param_b > 0.0)) {
        throw std::invalid_argument("beta_units: shape parameters must be > 0");
      }
      UnitProfile target;
      target.rho.resize(spec.units);
      for (auto& r : target.rho) r = rng.beta(spec.param_a, spec.param_b);
      out.pop = population_from_profile(target, n, spec.delta_w, rng);
      break;
    }
    case Generator::kGiniTarget: {
      auto target = gini_targeted_profile(spec.units, spec.param_a, spec.param_b);
      out.pop = population_from_profile(target, n, spec.delta_w, rng);
      break;
    }
    case Generator::kHardInstance: {
      auto highs = static_cast<std::size_t>(spec.param_a);
      out.pop = budget::hard_instance(spec.population, highs, spec.seed);
      break;
    }
  }
  out.profile = unit_profile(out.pop);
  out.rho_bar = out.profile.rho_bar_m();
  out.gini_coefficient = out.rho_bar > 0.0 ? gini(out.profile) : 0.0;
  return out;
}

}  // namespace privalloc::synth

#endif  // PRIVALLOC_SYNTH_HPP_
