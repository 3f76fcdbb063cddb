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

#ifndef PRIVALLOC_ALLOC_HPP_
#define PRIVALLOC_ALLOC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "privalloc/core.hpp"
#include "privalloc/dp.hpp"
#include "privalloc/rng.hpp"

namespace privalloc::alloc {

// Inputs of the private individual-level mechanism: bin width theta, uniform
// score-noise half-width s, budget k, zCDP parameter psi, failure probability
// beta. margin_scale rescales the threshold margin (1.0 = as specified) so
// the margin's conservatism can be studied from configs.
struct IlaParams {
  double psi = 1.0;
  double theta = 0.0;
  double s = 0.0;
  std::size_t k = 0;
  double beta = 0.1;
  double margin_scale = 1.0;
  std::size_t max_bins = 10'000'000;

  double bin_ratio() const { return (1.0 + 2.0 * s) / theta; }

  void validate() const {
    if (!(psi > 0.0)) throw std::invalid_argument("IlaParams: psi <= 0");
    if (!(theta > 0.0)) throw std::invalid_argument("IlaParams: theta <= 0");
    if (!(s >= 0.0)) throw std::invalid_argument("IlaParams: s < 0");
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("IlaParams: beta outside (0, 1)");
    }
    if (bin_ratio() < 1.0) {
      throw std::invalid_argument("IlaParams: (1 + 2s) / theta < 1");
    }
  }
};

struct IlaOutcome {
  double threshold = 0.0;              // left edge of the chosen bin
  std::vector<double> noisy_welfare;   // w_i + Unif[-s, s]
  Allocation treated;                  // { i : noisy_welfare[i] <= threshold }
  double margin = 0.0;
  std::size_t bin_count = 0;
  std::size_t threshold_bin = 0;
};

struct UlaOutcome {
  std::vector<double> noisy_profile;
  std::vector<std::size_t> per_unit_counts;
  Allocation treated;
};

// Stream tags for seed derivation, shared so that the psi -> infinity limits
// of the private mechanisms reproduce their non-private counterparts exactly.
namespace detail {
inline constexpr std::uint64_t kScoreNoiseStream = 1;
inline constexpr std::uint64_t kPrefixSumStream = 2;
inline constexpr std::uint64_t kProfileNoiseStream = 3;
inline constexpr std::uint64_t kMarginalUnitStream = 4;
}  // namespace detail

// Non-private individual-level allocation: aid in ascending welfare order.
// Identical to optimal_allocation; zero regret by construction.
inline Allocation ila_nonprivate(const Population& pop, std::size_t k) {
  return optimal_allocation(pop, k);
}

// Threshold margin of the private mechanism, verbatim from its selection
// rule (no sqrt(2) factors): the log argument is the real-valued bin ratio.
inline double ila_margin(const IlaParams& params) {
  if (std::isinf(params.psi)) return 0.0;
  double ratio = params.bin_ratio();
  double log_ratio = std::log(ratio);
  return params.margin_scale * (1.0 / std::sqrt(params.psi)) *
         (1.0 + (log_ratio + dp::kEulerGamma) / dp::kPi) *
         (std::sqrt(log_ratio) + std::sqrt(std::log(2.0 / params.beta)));
}

// Joint-zCDP individual-level allocation on a raw score vector in [0, 1]^n.
//
//   1. noisy scores  w^_i ~ Unif[w_i - s, w_i + s]
//   2. histogram over bins of width theta covering [-s, 1 + s]; the first bin
//      is closed, the rest are (l, r], the last is truncated at 1 + s
//   3. privatized prefix sums of the bin counts at psi
//   4. threshold bin j* = min { j : S~_j + margin >= k }
//   5. each i is treated iff w^_i <= l_{j*}
//
// The treated bit of individual i is a function of (threshold, w^_i) alone,
// which is what makes the mechanism Joint zCDP.
inline IlaOutcome ila_private_on_scores(const std::vector<double>& scores,
                                        const IlaParams& params,
                                        std::uint64_t seed) {
  params.validate();
  const double ratio = params.bin_ratio();
  const auto bins = static_cast<std::size_t>(std::ceil(ratio));
  if (bins > params.max_bins) {
    throw std::invalid_argument("ila_private: bin count exceeds cap");
  }

  IlaOutcome out;
  out.bin_count = bins;
  out.noisy_welfare = scores;
  if (params.s > 0.0) {
    Rng noise_rng(derive_seed(seed, {detail::kScoreNoiseStream}));
    for (double& w : out.noisy_welfare) {
      w += noise_rng.uniform(-params.s, params.s);
    }
  }

  const double lo = -params.s;
  std::vector<double> counts(bins, 0.0);
  for (double w : out.noisy_welfare) {
    std::size_t j;
    if (w <= lo + params.theta) {
      j = 1;
    } else {
      j = static_cast<std::size_t>(std::ceil((w - lo) / params.theta));
    }
    j = std::min(j, bins);
    counts[j - 1] += 1.0;
  }

  auto sums = dp::private_partial_sums(
      counts, params.psi, derive_seed(seed, {detail::kPrefixSumStream}));
  out.margin = ila_margin(params);

  std::size_t j_star = bins;
  for (std::size_t j = 1; j <= bins; ++j) {
    if (sums.values[j - 1] + out.margin >= static_cast<double>(params.k)) {
      j_star = j;
      break;
    }
  }
  out.threshold_bin = j_star;
  out.threshold = lo + static_cast<double>(j_star - 1) * params.theta;

  out.treated.budget = params.k;
  for (std::size_t i = 0; i < out.noisy_welfare.size(); ++i) {
    if (out.noisy_welfare[i] <= out.threshold) out.treated.treated.push_back(i);
  }
  return out;
}

inline IlaOutcome ila_private(const Population& pop, const IlaParams& params,
                              std::uint64_t seed) {
  pop.validate();
  return ila_private_on_scores(pop.welfare, params, seed);
}

// Parameters for i.i.d. welfare (stochastic adversary): theta = 1/(P pi
// sqrt(psi)), s = 0.
inline IlaParams ila_params_stochastic(std::size_t population, std::size_t k,
                                       double psi, double beta) {
  if (population < 2) {
    throw std::invalid_argument("ila_params_stochastic: P < 2");
  }
  IlaParams params;
  params.psi = psi;
  params.beta = beta;
  params.k = k;
  params.s = 0.0;
  params.theta = 1.0 / (static_cast<double>(population) * dp::kPi * std::sqrt(psi));
  return params;
}

// Parameters for arbitrary (oblivious-adversary) welfare:
// s = 1/(k pi sqrt(psi)), theta = 2 s ln^{3/2}(P) / (P pi sqrt(psi)).
inline IlaParams ila_params_adversarial(std::size_t population, std::size_t k,
                                        double psi, double beta) {
  if (k < 1) throw std::invalid_argument("ila_params_adversarial: k < 1");
  IlaParams params;
  params.psi = psi;
  params.beta = beta;
  params.k = k;
  params.s = 1.0 / (static_cast<double>(k) * dp::kPi * std::sqrt(psi));
  double log_p = std::log(static_cast<double>(population));
  params.theta = 2.0 * params.s * std::pow(log_p, 1.5) /
                 (static_cast<double>(population) * dp::kPi * std::sqrt(psi));
  return params;
}

// Greedy unit fill shared by the unit-level strategies: whole units in
// ascending score order (ties by unit index), the marginal unit filled by
// uniform sampling without replacement.
inline UlaOutcome greedy_unit_allocation(const std::vector<double>& scores,
                                         const Population& pop, std::size_t k,
                                         Rng& marginal_rng) {
  const auto members = pop.unit_members();
  const std::size_t m = members.size();
  if (scores.size() != m) {
    throw std::invalid_argument("greedy_unit_allocation: score size mismatch");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  UlaOutcome out;
  out.noisy_profile = scores;
  out.per_unit_counts.assign(m, 0);
  out.treated.budget = k;
  std::size_t remaining = std::min(k, pop.size());
  for (std::size_t j : order) {
    if (remaining == 0) break;
    const auto& unit = members[j];
    std::size_t take = std::min(remaining, unit.size());
    out.per_unit_counts[j] = take;
    if (take == unit.size()) {
      out.treated.treated.insert(out.treated.treated.end(), unit.begin(),
                                 unit.end());
    } else {
      auto picks = marginal_rng.sample_without_replacement(unit.size(), take);
      for (std::size_t p : picks) out.treated.treated.push_back(unit[p]);
    }
    remaining -= take;
  }
  std::sort(out.treated.treated.begin(), out.treated.treated.end());
  return out;
}

// Non-private unit-level allocation: whole units in ascending rho order.
inline UlaOutcome ula_nonprivate(const Population& pop, std::size_t k,
                                 std::uint64_t seed) {
  auto profile = unit_profile(pop);
  Rng marginal_rng(derive_seed(seed, {detail::kMarginalUnitStream}));
  return greedy_unit_allocation(profile.rho, pop, k, marginal_rng);
}

// zCDP unit-level allocation with public membership: rho~_j ~ N(rho_j,
// 1/(2 N_j^2 psi)), then the greedy fill on rho~. With psi = infinity this is
// ula_nonprivate exactly, marginal-unit draws included.
inline UlaOutcome ula_private_public_membership(const Population& pop,
                                                std::size_t k, double psi,
                                                std::uint64_t seed) {
  if (!(psi > 0.0)) {
    throw std::invalid_argument("ula_private_public_membership: psi <= 0");
  }
  auto profile = unit_profile(pop);
  if (!std::isinf(psi)) {
    Rng noise_rng(derive_seed(seed, {detail::kProfileNoiseStream}));
    auto sizes = pop.unit_sizes();
    for (std::size_t j = 0; j < profile.rho.size(); ++j) {
      double sigma = 1.0 / (static_cast<double>(sizes[j]) * std::sqrt(2.0 * psi));
      profile.rho[j] += noise_rng.normal() * sigma;
    }
  }
  Rng marginal_rng(derive_seed(seed, {detail::kMarginalUnitStream}));
  return greedy_unit_allocation(profile.rho, pop, k, marginal_rng);
}

// Joint-zCDP unit-level allocation with private membership. Releases the
// unit profile at psi1 with replace-one sensitivity sqrt(2)/N (membership
// changes touch two units), maps each individual to their unit's noisy
// profile, and runs the individual-level mechanism at psi2 with
// oblivious-adversary parameters. Total guarantee: Joint (psi1 + psi2)-zCDP.
inline IlaOutcome ula_private_private_membership(const Population& pop,
                                                 std::size_t k, double psi1,
                                                 double psi2, double beta,
                                                 std::uint64_t seed) {
  if (!(psi1 > 0.0 && psi2 > 0.0)) {
    throw std::invalid_argument("ula_private_private_membership: psi <= 0");
  }
  auto profile = unit_profile(pop);
  const auto n_min = static_cast<double>(pop.min_unit_size());
  if (n_min < 1.0) {
    throw std::invalid_argument("ula_private_private_membership: empty unit");
  }
  if (!std::isinf(psi1)) {
    Rng noise_rng(derive_seed(seed, {detail::kProfileNoiseStream}));
    for (double& r : profile.rho) {
      r += noise_rng.normal() / (n_min * std::sqrt(psi1));
    }
  }
  // Profiles live in [0, 1] publicly, so clamping the released values is free
  // post-processing and keeps the histogram domain valid.
  std::vector<double> scores(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    scores[i] = std::clamp(profile.rho[pop.unit_of[i]], 0.0, 1.0);
  }
  auto params = ila_params_adversarial(pop.size(), k, psi2, beta);
  return ila_private_on_scores(scores, params, seed);
}

// Budget split for the private-membership mechanism:
// psi2 / psi1 = (3 ln^{3/2}(P) / pi * N / (C sqrt(2)))^{2/3}.
inline std::pair<double, double> psi_split(std::size_t population, double n_min,
                                           double c_constant, double psi) {
  if (population < 2 || !(n_min > 0.0) || !(c_constant > 0.0) || !(psi > 0.0)) {
    throw std::invalid_argument("psi_split: inputs must be positive");
  }
  double log_p = std::log(static_cast<double>(population));
  double ratio = std::pow(
      3.0 * std::pow(log_p, 1.5) / dp::kPi * n_min / (c_constant * std::sqrt(2.0)),
      2.0 / 3.0);
  double psi1 = psi / (1.0 + ratio);
  return {psi1, psi - psi1};
}

// min over the three norm choices of the unit-level noise constant:
// C = min(2 min(k, P-k) sqrt(2 ln 2M), sqrt(2 min(k, P-k) P), P sqrt(2/pi)).
inline double ula_noise_constant(std::size_t population, std::size_t units,
                                 std::size_t k) {
  double p = static_cast<double>(population);
  std::size_t kk = std::min(k, population);
  double mk = static_cast<double>(std::min(kk, population - kk));
  double c1 = 2.0 * mk * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(units)));
  double c2 = std::sqrt(2.0 * mk * p);
  double c3 = p * std::sqrt(2.0 / dp::kPi);
  return std::min({c1, c2, c3});
}

// --- printed regret bounds ---

// Stochastic-adversary bound at theta = 1/(P pi sqrt(psi)), s = 0, for
// welfare i.i.d. with maximum density gamma (asymptotic factor dropped):
// (2 ln^{3/2} P + gamma + 2 ln P sqrt(ln(2/beta))) / (pi sqrt(psi)).
inline double ila_bound_stochastic(std::size_t population, double psi,
                                   double beta, double max_density) {
  double log_p = std::log(static_cast<double>(population));
  return (2.0 * std::pow(log_p, 1.5) + max_density +
          2.0 * log_p * std::sqrt(std::log(2.0 / beta))) /
         (dp::kPi * std::sqrt(psi));
}

// Oblivious-adversary bound at the adversarial parameter choice (asymptotic
// factor dropped): (3 ln^{3/2} P + 2 ln P sqrt(ln(2/beta))) / (pi sqrt(psi)).
inline double ila_bound_adversarial(std::size_t population, double psi,
                                    double beta) {
  double log_p = std::log(static_cast<double>(population));
  return (3.0 * std::pow(log_p, 1.5) +
          2.0 * log_p * std::sqrt(std::log(2.0 / beta))) /
         (dp::kPi * std::sqrt(psi));
}

// Finite-P high-probability shortfall bound for the private individual-level
// mechanism: k s + n p + (2 sigma + sqrt(n p)) (sqrt(ln R) + sqrt(ln(2/beta)))
// where R is the bin ratio, sigma the prefix-sum noise scale at R, and p an
// upper bound on any single bin's occupancy probability.
inline double ila_shortfall_bound(const IlaParams& params,
                                  std::size_t population, double bin_prob) {
  double ratio = params.bin_ratio();
  double log_ratio = std::log(ratio);
  double sigma = (1.0 / std::sqrt(params.psi)) *
                 (1.0 + (log_ratio + dp::kEulerGamma) / dp::kPi);
  double np = static_cast<double>(population) * bin_prob;
  return static_cast<double>(params.k) * params.s + np +
         (2.0 * sigma + std::sqrt(np)) *
             (std::sqrt(log_ratio) + std::sqrt(std::log(2.0 / params.beta)));
}

// Three-way-min privacy term of the public-membership unit-level bound:
// (1/(N sqrt(psi))) min( 2 min(k,P-k) sqrt(ln 2M) + sqrt(ln 1/beta),
//                        sqrt(min(k,P-k) P)       + sqrt(ln 1/beta),
//                        P / sqrt(pi)             + sqrt(M ln 1/beta) ).
inline double ula_bound_privacy_term(std::size_t units, std::size_t unit_size,
                                     std::size_t k, std::size_t population,
                                     double psi, double beta) {
  double p = static_cast<double>(population);
  double m = static_cast<double>(units);
  std::size_t kk = std::min(k, population);
  double mk = static_cast<double>(std::min(kk, population - kk));
  double log_beta = std::log(1.0 / beta);
  double t1 = 2.0 * mk * std::sqrt(std::log(2.0 * m)) + std::sqrt(log_beta);
  double t2 = std::sqrt(mk * p) + std::sqrt(log_beta);
  double t3 = p / std::sqrt(dp::kPi) + std::sqrt(m * log_beta);
  return std::min({t1, t2, t3}) /
         (static_cast<double>(unit_size) * std::sqrt(psi));
}

// Privacy term of the private-membership bound at the recommended split:
// (1/sqrt(psi)) [ (3/pi)^{2/3} ln P + (C sqrt(2) / N)^{2/3} ]^{3/2}.
inline double ula_private_membership_bound(std::size_t population, double n_min,
                                           double c_constant, double psi) {
  double log_p = std::log(static_cast<double>(population));
  double inner = std::pow(3.0 / dp::kPi, 2.0 / 3.0) * log_p +
                 std::pow(c_constant * std::sqrt(2.0) / n_min, 2.0 / 3.0);
  return std::pow(inner, 1.5) / std::sqrt(psi);
}

}  // namespace privalloc::alloc

#endif  // PRIVALLOC_ALLOC_HPP_
