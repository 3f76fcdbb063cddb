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

#ifndef PRIVALLOC_BUDGET_HPP_
#define PRIVALLOC_BUDGET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "privalloc/alloc.hpp"
#include "privalloc/core.hpp"
#include "privalloc/dp.hpp"
#include "privalloc/rng.hpp"

namespace privalloc::budget {

// Observing one welfare score costs lambda treatments; the full budget buys
// k treatments. Any plan must satisfy k' + ceil(lambda * n) <= k.
struct SamplingEconomy {
  double lambda = 0.0;
  std::size_t k = 0;
  std::size_t population = 0;

  void validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("SamplingEconomy: lambda < 0");
    if (k > population) throw std::invalid_argument("SamplingEconomy: k > P");
    if (population == 0) throw std::invalid_argument("SamplingEconomy: empty population");
  }
};

enum class Regime {
  kUlaIlaRand,     // ULA > ILA > RAND
  kUlaIlaEqRand,   // ULA > ILA = RAND
  kIlaUlaRand,     // ILA >= ULA >= RAND
};

inline const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::kUlaIlaRand: return "ULA>ILA>RAND";
    case Regime::kUlaIlaEqRand: return "ULA>ILA=RAND";
    case Regime::kIlaUlaRand: return "ILA>=ULA>=RAND";
  }
  return "?";
}

struct RegimeLabel {
  Regime label = Regime::kIlaUlaRand;
  double lambda_low = 0.0;   // cost threshold below which ILA dominates
  double lambda_high = 0.0;  // cost threshold above which sampling is useless
};

struct IlaSamplingPlan {
  std::size_t n = 0;        // scores to buy
  std::size_t k_prime = 0;  // treatments that remain affordable
  bool sample_mode = false; // false: allocate uniformly at random
};

// Phase transition at lambda = (P - k)/P: below it, sample n = Pk/(P lambda + k)
// and treat k' = k - ceil(lambda n); at or above it, skip sampling entirely.
inline IlaSamplingPlan ila_sampling_plan(const SamplingEconomy& econ) {
  econ.validate();
  const double p = static_cast<double>(econ.population);
  const double k = static_cast<double>(econ.k);
  IlaSamplingPlan plan;
  if (econ.lambda >= (p - k) / p) {
    plan.n = 0;
    plan.k_prime = econ.k;
    plan.sample_mode = false;
    return plan;
  }
  plan.sample_mode = true;
  plan.n = static_cast<std::size_t>(std::floor(p * k / (p * econ.lambda + k)));
  auto charge = static_cast<std::size_t>(std::ceil(econ.lambda * plan.n));
  plan.k_prime = econ.k > charge ? econ.k - charge : 0;
  return plan;
}

// Sample n indices uniformly, treat the kappa lowest revealed scores, and
// fill any remaining budget from the unseen indices at random. kappa
// defaults to k', the interior optimum.
inline Allocation ila_with_sampling(const Population& pop,
                                    const SamplingEconomy& econ,
                                    std::uint64_t seed,
                                    std::optional<std::size_t> kappa = {}) {
  auto plan = ila_sampling_plan(econ);
  if (!plan.sample_mode) {
    return random_allocation(pop, econ.k, seed);
  }
  Rng rng(derive_seed(seed, {1}));
  auto revealed = rng.sample_without_replacement(pop.size(), plan.n);
  std::size_t take = std::min(kappa.value_or(plan.k_prime), plan.k_prime);

  std::stable_sort(revealed.begin(), revealed.end(),
                   [&](std::size_t a, std::size_t b) {
                     return pop.welfare[a] < pop.welfare[b];
                   });
  Allocation alloc;
  alloc.budget = econ.k;
  alloc.treated.assign(revealed.begin(), revealed.begin() + take);

  if (take < plan.k_prime) {
    std::vector<bool> seen(pop.size(), false);
    for (std::size_t i : revealed) seen[i] = true;
    std::vector<std::size_t> unseen;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!seen[i]) unseen.push_back(i);
    }
    Rng fill_rng(derive_seed(seed, {2}));
    auto picks =
        fill_rng.sample_without_replacement(unseen.size(), plan.k_prime - take);
    for (std::size_t p : picks) alloc.treated.push_back(unseen[p]);
  }
  std::sort(alloc.treated.begin(), alloc.treated.end());
  return alloc;
}

// Private variant: the revealed sample goes through the Joint-zCDP
// individual-level mechanism with oblivious-adversary parameters and budget
// k'. In random mode the allocation is data-independent, so privacy is free.
inline Allocation ila_with_sampling_private(const Population& pop,
                                            const SamplingEconomy& econ,
                                            double psi, double beta,
                                            std::uint64_t seed) {
  auto plan = ila_sampling_plan(econ);
  if (!plan.sample_mode) {
    return random_allocation(pop, econ.k, seed);
  }
  Rng rng(derive_seed(seed, {1}));
  auto revealed = rng.sample_without_replacement(pop.size(), plan.n);
  std::vector<double> scores(revealed.size());
  for (std::size_t i = 0; i < revealed.size(); ++i) {
    scores[i] = pop.welfare[revealed[i]];
  }
  if (plan.k_prime == 0) return Allocation{{}, econ.k};
  if (std::isinf(psi)) {
    std::vector<std::size_t> pos(revealed.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });
    Allocation exact;
    exact.budget = econ.k;
    for (std::size_t i = 0; i < plan.k_prime; ++i) {
      exact.treated.push_back(revealed[pos[i]]);
    }
    std::sort(exact.treated.begin(), exact.treated.end());
    return exact;
  }
  // beta budget split three ways in the combined guarantee: pass 2 beta / 3 so
  // the mechanism's internal log(2/beta') matches the printed log(3/beta).
  auto params = alloc::ila_params_adversarial(plan.n, plan.k_prime, psi,
                                              2.0 * beta / 3.0);
  auto outcome = alloc::ila_private_on_scores(scores, params,
                                              derive_seed(seed, {3}));
  Allocation alloc;
  alloc.budget = econ.k;
  for (std::size_t pos : outcome.treated.treated) {
    alloc.treated.push_back(revealed[pos]);
  }
  std::sort(alloc.treated.begin(), alloc.treated.end());
  return alloc;
}

// Worst-case input family for sampling-based allocation: binary welfare with
// exactly k high-welfare individuals placed uniformly, delta_w = 1.
inline Population hard_instance(std::size_t population, std::size_t k,
                                std::uint64_t seed) {
  if (k > population) throw std::invalid_argument("hard_instance: k > P");
  Rng rng(seed);
  std::vector<double> w(population, 0.0);
  for (std::size_t i : rng.sample_without_replacement(population, k)) {
    w[i] = 1.0;
  }
  return Population::with_uniform_units(std::move(w), 1, 1.0);
}

struct UlaSamplingPlan {
  std::size_t n = 0;  // total stratified sample size, capped at P
  double c = 0.0;     // unit-level noise constant
};

// n = max( (C M / (lambda sqrt(2 psi)))^{1/2}, (C^2 M / (16 lambda^2))^{1/3} ),
// with C the three-way-min noise constant. lambda = 0 degenerates to free
// sampling of everyone.
inline UlaSamplingPlan ula_sampling_plan(std::size_t population,
                                         std::size_t units, std::size_t k,
                                         double lambda, double psi) {
  if (units == 0 || population == 0) {
    throw std::invalid_argument("ula_sampling_plan: empty inputs");
  }
  UlaSamplingPlan plan;
  plan.c = alloc::ula_noise_constant(population, units, k);
  if (lambda == 0.0) {
    plan.n = population;
    return plan;
  }
  double m = static_cast<double>(units);
  double privacy_term = std::isinf(psi)
                            ? 0.0
                            : std::sqrt(plan.c * m / (lambda * std::sqrt(2.0 * psi)));
  double statistical_term =
      std::cbrt(plan.c * plan.c * m / (16.0 * lambda * lambda));
  double n = std::max(privacy_term, statistical_term);
  plan.n = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(n)),
                                 population);
  return plan;
}

// Stratified sample of n individuals (floor(n/M) per unit, remainder to the
// lowest-indexed units), noisy per-unit estimates, greedy fill with the
// remaining budget k - ceil(lambda n).
inline alloc::UlaOutcome ula_with_sampling_private(
    const Population& pop, std::size_t k, double lambda, double psi,
    std::uint64_t seed, std::optional<std::size_t> override_n = {}) {
  pop.validate();
  const auto members = pop.unit_members();
  const std::size_t m = members.size();
  std::size_t n = override_n
                      ? *override_n
                      : ula_sampling_plan(pop.size(), m, k, lambda, psi).n;
  if (n < m) {
    throw std::invalid_argument("ula_with_sampling_private: fewer than one sample per unit");
  }
  auto charge = static_cast<std::size_t>(std::ceil(lambda * n));
  if (charge >= k) {
    throw std::invalid_argument("ula_with_sampling_private: plan infeasible (lambda n >= k)");
  }
  std::size_t k_prime = k - charge;

  std::vector<std::size_t> per_unit(m, n / m);
  for (std::size_t j = 0; j < n % m; ++j) ++per_unit[j];

  Rng sample_rng(derive_seed(seed, {1}));
  Rng noise_rng(derive_seed(seed, {2}));
  std::vector<double> rho_hat(m, 0.0);
  const double threshold = 1.0 - pop.delta_w;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t mj = std::min(per_unit[j], members[j].size());
    auto picks = sample_rng.sample_without_replacement(members[j].size(), mj);
    std::size_t highs = 0;
    for (std::size_t p : picks) {
      if (pop.welfare[members[j][p]] > threshold) ++highs;
    }
    rho_hat[j] = static_cast<double>(highs) / static_cast<double>(mj);
    if (!std::isinf(psi)) {
      // Replace-one sensitivity of a mean over m_j samples is 1/m_j.
      rho_hat[j] += noise_rng.normal() /
                    (static_cast<double>(mj) * std::sqrt(2.0 * psi));
    }
  }
  Rng marginal_rng(derive_seed(seed, {3}));
  auto outcome = alloc::greedy_unit_allocation(rho_hat, pop, k_prime,
                                                       marginal_rng);
  outcome.treated.budget = k;
  return outcome;
}

// The three cost regimes in terms of (G, lambda, rho_bar_M, k/P):
//   lambda_low  = (k/P) rho_bar (1-G) / (1 - rho_bar (1-G))
//   lambda_high = 1 - k/P
// ULA > ILA > RAND between the thresholds; ULA > ILA = RAND above lambda_high
// when inequality is present; ILA >= ULA >= RAND below lambda_low (and in the
// degenerate G = 0, lambda >= lambda_high corner, where everything ties).
inline RegimeLabel classify_regime_sampling(double gini_coefficient,
                                            double lambda, double rho_bar_m,
                                            std::size_t k,
                                            std::size_t population) {
  double effective = rho_bar_m * (1.0 - gini_coefficient);
  if (!(effective < 1.0)) {
    throw std::invalid_argument("classify_regime_sampling: rho_bar (1-G) >= 1");
  }
  double ratio = static_cast<double>(k) / static_cast<double>(population);
  RegimeLabel label;
  label.lambda_low = ratio * effective / (1.0 - effective);
  label.lambda_high = 1.0 - ratio;
  if (lambda >= label.lambda_high) {
    label.label = gini_coefficient > 0.0 ? Regime::kUlaIlaEqRand
                                         : Regime::kIlaUlaRand;
  } else if (lambda > label.lambda_low) {
    label.label = Regime::kUlaIlaRand;
  } else {
    label.label = Regime::kIlaUlaRand;
  }
  return label;
}

// Average per-unit Bernoulli variance against its Gini-controlled ceiling:
// (1/M) sum rho_j (1 - rho_j) <= rho_bar (1 - rho_bar) - 3 rho_bar^2 G^2.
inline std::pair<double, double> inequality_variance_bound(
    const UnitProfile& profile) {
  double mean = profile.rho_bar_m();
  if (mean <= 0.0) {
    throw std::invalid_argument("inequality_variance_bound: rho_bar == 0");
  }
  double lhs = 0.0;
  for (double r : profile.rho) lhs += r * (1.0 - r);
  lhs /= static_cast<double>(profile.units());
  double g = gini(profile);
  double rhs = mean * (1.0 - mean) - 3.0 * mean * mean * g * g;
  return {lhs, rhs};
}

// --- printed bounds ---

inline double ila_sampling_upper_bound(std::size_t population, std::size_t k,
                                       double lambda) {
  double p = static_cast<double>(population);
  double kk = static_cast<double>(k);
  if (lambda >= (p - kk) / p) return kk * (1.0 - kk / p);
  double denom = p * lambda + kk;
  return p * lambda * kk / denom +
         std::sqrt(std::min(p * kk, p * p * lambda) / (16.0 * denom));
}

inline double ila_sampling_lower_bound(std::size_t population, std::size_t k,
                                       double lambda) {
  double p = static_cast<double>(population);
  double kk = static_cast<double>(k);
  if (lambda >= (p - kk) / p) return kk * (1.0 - kk / p);
  return (p * lambda - 0.25) * kk / (p * lambda + kk);
}

inline double ila_sampling_private_bound(std::size_t population, std::size_t k,
                                         double lambda, double psi,
                                         double beta) {
  double p = static_cast<double>(population);
  double kk = static_cast<double>(k);
  double denom = p * lambda + kk;
  double log3b = std::log(3.0 / beta);
  double log_p = std::log(p);
  return p * (lambda * kk + std::sqrt(lambda * kk * log3b)) / denom +
         std::sqrt(std::min(p * kk, p * p * lambda) / (16.0 * denom)) +
         (3.0 * std::pow(log_p, 1.5) + 2.0 * log_p * std::sqrt(log3b)) /
             (dp::kPi * std::sqrt(psi));
}

// Mean normalized regret ceiling for stratified unit-level sampling with n
// observations at privacy psi.
inline double ula_sampling_bound(std::size_t population, std::size_t units,
                                 std::size_t unit_size, std::size_t k,
                                 double lambda, std::size_t n, double psi,
                                 double rho_bar_k, double rho_bar_m,
                                 double gini_coefficient) {
  double p = static_cast<double>(population);
  double m = static_cast<double>(units);
  double nn = static_cast<double>(n);
  double nd = static_cast<double>(unit_size);
  std::size_t kc = std::min(k, population);
  double mk = static_cast<double>(std::min(kc, population - kc));
  double privacy_var = std::isinf(psi) ? 0.0 : m * m / (2.0 * psi * nn * nn);
  double worst_stat_var = (p - nn) / (4.0 * nn * nd);
  double gini_ceiling = rho_bar_m * (1.0 - rho_bar_m) -
                        3.0 * rho_bar_m * rho_bar_m * gini_coefficient *
                            gini_coefficient;
  double stat_var = (p - nn) * gini_ceiling / (nn * nd);
  double t1 = std::sqrt(privacy_var + worst_stat_var) * 2.0 * mk *
              std::sqrt(2.0 * std::log(2.0 * m));
  double t2 = std::sqrt(privacy_var + stat_var) * std::sqrt(2.0 * mk * p);
  double t3 = std::sqrt(privacy_var + stat_var) * p * std::sqrt(2.0 / dp::kPi);
  return rho_bar_k * static_cast<double>(k) +
         (1.0 - rho_bar_k) * lambda * nn + std::min({t1, t2, t3});
}

// Marginal regret increase of the budgeted private unit-level strategy over
// its non-private counterpart at the recommended n.
inline double ula_sampling_excess_bound(double c, std::size_t units,
                                        double lambda, double psi) {
  double m = static_cast<double>(units);
  double privacy = std::isinf(psi)
                       ? 0.0
                       : std::pow(2.0, 0.75) *
                             std::sqrt(c * m * lambda / std::sqrt(psi));
  return privacy + std::pow(2.0, -4.0 / 3.0) * std::cbrt(c * c * m * lambda);
}

}  // namespace privalloc::budget

#endif  // PRIVALLOC_BUDGET_HPP_
