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

#ifndef PRIVALLOC_CORE_HPP_
#define PRIVALLOC_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "privalloc/rng.hpp"

namespace privalloc {

// A population of P individuals with welfare in [0,1], partitioned into
// units. Treating an individual raises their welfare by delta_w, capped at 1.
// An individual is high-welfare when w > 1 - delta_w.
//
// Units are contiguous index blocks in the canonical (equal-size)
// construction, but any unit_of map is accepted; the unit-level algorithms
// only require a publicly known minimum unit size.
struct Population {
  std::vector<double> welfare;
  std::vector<std::uint32_t> unit_of;
  double delta_w = 1.0;

  std::size_t size() const { return welfare.size(); }

  std::uint32_t unit_count() const {
    std::uint32_t m = 0;
    for (std::uint32_t u : unit_of) m = std::max(m, u + 1);
    return m;
  }

  std::vector<std::size_t> unit_sizes() const {
    std::vector<std::size_t> sizes(unit_count(), 0);
    for (std::uint32_t u : unit_of) ++sizes[u];
    return sizes;
  }

  std::size_t min_unit_size() const {
    auto sizes = unit_sizes();
    if (sizes.empty()) return 0;
    return *std::min_element(sizes.begin(), sizes.end());
  }

  std::vector<std::vector<std::size_t>> unit_members() const {
    std::vector<std::vector<std::size_t>> members(unit_count());
    for (std::size_t i = 0; i < unit_of.size(); ++i) {
      members[unit_of[i]].push_back(i);
    }
    return members;
  }

  void validate() const {
    if (delta_w <= 0.0 || delta_w > 1.0) {
      throw std::invalid_argument("Population: delta_w must be in (0, 1]");
    }
    if (unit_of.size() != welfare.size()) {
      throw std::invalid_argument("Population: unit_of size mismatch");
    }
    for (double w : welfare) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw std::invalid_argument("Population: welfare outside [0, 1]");
      }
    }
  }

  // Canonical layout: M contiguous units of size N, P = M * N.
  static Population with_uniform_units(std::vector<double> welfare,
                                       std::uint32_t units, double delta_w) {
    Population pop;
    if (units == 0 || welfare.size() % units != 0) {
      throw std::invalid_argument("with_uniform_units: P must equal M * N");
    }
    std::size_t unit_size = welfare.size() / units;
    pop.welfare = std::move(welfare);
    pop.delta_w = delta_w;
    pop.unit_of.resize(pop.welfare.size());
    for (std::size_t i = 0; i < pop.unit_of.size(); ++i) {
      pop.unit_of[i] = static_cast<std::uint32_t>(i / unit_size);
    }
    pop.validate();
    return pop;
  }
};

// Per-unit high-welfare fractions rho_j and their summaries.
struct UnitProfile {
  std::vector<double> rho;

  std::size_t units() const { return rho.size(); }

  double rho_bar_m() const {
    if (rho.empty()) throw std::invalid_argument("UnitProfile: empty");
    return std::accumulate(rho.begin(), rho.end(), 0.0) / rho.size();
  }

  // Mean of the K smallest entries.
  double rho_bar_k(std::size_t k) const {
    if (k == 0 || k > rho.size()) {
      throw std::invalid_argument("rho_bar_k: K must be in [1, M]");
    }
    std::vector<double> sorted = rho;
    std::sort(sorted.begin(), sorted.end());
    return std::accumulate(sorted.begin(), sorted.begin() + k, 0.0) / k;
  }
};

// An allocation is an index set plus the budget it was computed for. The
// budget is metadata: private mechanisms guarantee |treated| <= k only with
// high probability, and the overshoot rate is itself a measured quantity.
struct Allocation {
  std::vector<std::size_t> treated;  // distinct, ascending
  std::size_t budget = 0;

  void validate(std::size_t population) const {
    for (std::size_t i = 0; i < treated.size(); ++i) {
      if (treated[i] >= population) {
        throw std::invalid_argument("Allocation: index out of range");
      }
      if (i > 0 && treated[i] <= treated[i - 1]) {
        throw std::invalid_argument("Allocation: indices must be ascending");
      }
    }
  }
};

struct RegretReport {
  double value = 0.0;
  double opt_value = 0.0;
  double regret = 0.0;
  double normalized_regret = 0.0;
  std::optional<double> bound;
};

// tau_i = min(1, w_i + delta_w) - w_i, evaluated in its branch form: exactly
// delta_w below the cap and exactly 1 - w above it. The literal float
// expression would perturb tau by an ulp and break its monotonicity in w.
inline double treatment_effect(double welfare, double delta_w) {
  if (!(welfare >= 0.0 && welfare <= 1.0)) {
    throw std::invalid_argument("treatment_effect: welfare outside [0, 1]");
  }
  if (!(delta_w > 0.0 && delta_w <= 1.0)) {
    throw std::invalid_argument("treatment_effect: delta_w outside (0, 1]");
  }
  return welfare <= 1.0 - delta_w ? delta_w : 1.0 - welfare;
}

// Val(I, w) = sum of treatment effects over the treated set.
inline double allocation_value(const Allocation& alloc, const Population& pop) {
  double total = 0.0;
  for (std::size_t i : alloc.treated) {
    if (i >= pop.size()) {
      throw std::invalid_argument("allocation_value: index out of range");
    }
    total += treatment_effect(pop.welfare[i], pop.delta_w);
  }
  return total;
}

namespace detail {
// Indices sorted by (welfare, index) ascending. Ties always break toward the
// lower index.
inline std::vector<std::size_t> welfare_order(const std::vector<double>& w) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  return order;
}
}  // namespace detail

// The k lowest-welfare individuals. Optimal because tau is non-increasing in
// welfare.
inline Allocation optimal_allocation(const Population& pop, std::size_t k) {
  if (k > pop.size()) {
    throw std::invalid_argument("optimal_allocation: k > P");
  }
  auto order = detail::welfare_order(pop.welfare);
  Allocation alloc;
  alloc.budget = k;
  alloc.treated.assign(order.begin(), order.begin() + k);
  std::sort(alloc.treated.begin(), alloc.treated.end());
  return alloc;
}

// Exhaustive maximum over all k-subsets. Test oracle; deliberately
// independent of the sort-based optimal_allocation.
inline double brute_force_opt_value(const Population& pop, std::size_t k) {
  const std::size_t p = pop.size();
  if (p > 25) {
    throw std::invalid_argument("brute_force_opt_value: P > 25");
  }
  if (k > p) {
    throw std::invalid_argument("brute_force_opt_value: k > P");
  }
  if (k == 0) return 0.0;
  std::vector<double> tau(p);
  for (std::size_t i = 0; i < p; ++i) {
    tau[i] = treatment_effect(pop.welfare[i], pop.delta_w);
  }
  // Lexicographic walk over k-combinations. The argmax is resolved in long
  // double (the running double sum only screens candidates), and the winning
  // set is then re-summed in ascending index order exactly the way
  // allocation_value sums, so the result is bit-identical to
  // allocation_value on the optimal set.
  auto exact_sum = [&](const std::vector<std::size_t>& comb) {
    long double acc = 0.0L;
    for (std::size_t i : comb) acc += static_cast<long double>(tau[i]);
    return acc;
  };
  std::vector<std::size_t> comb(k);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  double sum = 0.0;
  for (std::size_t i : comb) sum += tau[i];
  long double best = exact_sum(comb);
  std::vector<std::size_t> best_set = comb;
  for (;;) {
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == p - k + i - 1) --i;
    if (i == 0) break;
    --i;
    sum -= tau[comb[i]];
    ++comb[i];
    sum += tau[comb[i]];
    for (std::size_t j = i + 1; j < k; ++j) {
      sum -= tau[comb[j]];
      comb[j] = comb[j - 1] + 1;
      sum += tau[comb[j]];
    }
    if (sum >= static_cast<double>(best) - 1e-9) {
      long double exact = exact_sum(comb);
      if (exact > best) {
        best = exact;
        best_set = comb;
      }
    }
  }
  double value = 0.0;
  for (std::size_t i : best_set) value += tau[i];
  return value;
}

// Regret(I, w; k) = max_{|J|=k} Val(J, w) - Val(I, w). Non-negative whenever
// |treated| <= k.
inline RegretReport regret(const Allocation& alloc, const Population& pop,
                           std::size_t k) {
  RegretReport report;
  report.value = allocation_value(alloc, pop);
  report.opt_value = allocation_value(optimal_allocation(pop, k), pop);
  report.regret = report.opt_value - report.value;
  report.normalized_regret = report.regret / pop.delta_w;
  return report;
}

// rho_j = fraction of unit j with welfare above 1 - delta_w.
inline UnitProfile unit_profile(const Population& pop) {
  pop.validate();
  UnitProfile profile;
  profile.rho.assign(pop.unit_count(), 0.0);
  auto sizes = pop.unit_sizes();
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop.welfare[i] > 1.0 - pop.delta_w) {
      profile.rho[pop.unit_of[i]] += 1.0;
    }
  }
  for (std::size_t j = 0; j < profile.rho.size(); ++j) {
    if (sizes[j] == 0) throw std::invalid_argument("unit_profile: empty unit");
    profile.rho[j] /= static_cast<double>(sizes[j]);
  }
  return profile;
}

// G = (1 / (2 M^2 rho_bar)) * sum_{i,j} |rho_i - rho_j|. Undefined when the
// profile is all-zero.
inline double gini(const UnitProfile& profile) {
  const std::size_t m = profile.units();
  if (m == 0) throw std::invalid_argument("gini: empty profile");
  double mean = profile.rho_bar_m();
  if (mean <= 0.0) throw std::domain_error("gini: undefined for all-zero rho");
  std::vector<double> sorted = profile.rho;
  std::sort(sorted.begin(), sorted.end());
  // Sorted-pair form: sum_{i<=j} (rho_(j) - rho_(i)) = sum_k (2k - M - 1) rho_(k).
  double weighted = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    weighted += (2.0 * k - m - 1.0) * sorted[k - 1];
  }
  return weighted / (static_cast<double>(m) * m * mean);
}

// Same Gini through the O(M^2) double-sum form; used to cross-check the
// sorted-pair form.
inline double gini_double_sum(const UnitProfile& profile) {
  const std::size_t m = profile.units();
  if (m == 0) throw std::invalid_argument("gini: empty profile");
  double mean = profile.rho_bar_m();
  if (mean <= 0.0) throw std::domain_error("gini: undefined for all-zero rho");
  double total = 0.0;
  for (double a : profile.rho) {
    for (double b : profile.rho) total += std::abs(a - b);
  }
  return total / (2.0 * m * m * mean);
}

// k individuals sampled uniformly without replacement.
inline Allocation random_allocation(const Population& pop, std::size_t k,
                                    std::uint64_t seed) {
  if (k > pop.size()) {
    throw std::invalid_argument("random_allocation: k > P");
  }
  Rng rng(seed);
  Allocation alloc;
  alloc.budget = k;
  alloc.treated = rng.sample_without_replacement(pop.size(), k);
  return alloc;
}

namespace detail {
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}
}  // namespace detail

// Columnar CSV: header `individual,welfare,unit`. delta_w travels in the
// experiment config, not the data file.
inline void write_population_csv(std::ostream& out, const Population& pop) {
  out << "individual,welfare,unit\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << i << ',' << detail::format_double(pop.welfare[i]) << ','
        << pop.unit_of[i] << '\n';
  }
}

inline Population read_population_csv(std::istream& in, double delta_w) {
  Population pop;
  pop.delta_w = delta_w;
  std::string line;
  if (!std::getline(in, line) || line.rfind("individual,welfare,unit", 0) != 0) {
    throw std::invalid_argument("population csv: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // individual index, implied by order
    if (!std::getline(row, field, ',')) {
      throw std::invalid_argument("population csv: missing welfare");
    }
    pop.welfare.push_back(std::stod(field));
    if (!std::getline(row, field, ',')) {
      throw std::invalid_argument("population csv: missing unit");
    }
    pop.unit_of.push_back(static_cast<std::uint32_t>(std::stoul(field)));
  }
  pop.validate();
  return pop;
}

}  // namespace privalloc

#endif  // PRIVALLOC_CORE_HPP_
