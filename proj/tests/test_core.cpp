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

#include "privalloc/core.hpp"

#include <cmath>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"

using namespace privalloc;

namespace {

Population single_unit(std::vector<double> welfare, double delta_w) {
  return Population::with_uniform_units(std::move(welfare), 1, delta_w);
}

Population random_population(Rng& rng, std::size_t p, double delta_w) {
  std::vector<double> w(p);
  for (auto& x : w) x = rng.uniform();
  return single_unit(std::move(w), delta_w);
}

}  // namespace

TEST_CASE("treatment_effect basic values", "[core]") {
  CHECK(treatment_effect(0.3, 0.2) == Catch::Approx(0.2));
  CHECK(treatment_effect(1.0, 0.2) == Catch::Approx(0.0).margin(1e-15));
  CHECK(treatment_effect(0.9, 0.2) == Catch::Approx(0.1));
  CHECK_THROWS_AS(treatment_effect(-0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(treatment_effect(1.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(treatment_effect(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(treatment_effect(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("treatment_effect is non-increasing in welfare", "[core]") {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    double a = rng.uniform();
    double b = rng.uniform();
    if (a > b) std::swap(a, b);
    double d = 0.05 + 0.95 * rng.uniform();
    CHECK(treatment_effect(a, d) >= treatment_effect(b, d) - 1e-12);
  }
}

TEST_CASE("allocation_value sums treatment effects", "[core]") {
  auto pop = single_unit({0.0, 0.5, 0.95}, 0.1);
  CHECK(allocation_value({{}, 0}, pop) == 0.0);
  CHECK(allocation_value({{0, 1}, 2}, pop) == Catch::Approx(0.2));
  CHECK(allocation_value({{0, 2}, 2}, pop) == Catch::Approx(0.15));
  CHECK_THROWS_AS(allocation_value({{3}, 1}, pop), std::invalid_argument);
}

TEST_CASE("optimal_allocation picks lowest welfare with index ties", "[core]") {
  auto pop = single_unit({0.9, 0.1, 0.5}, 0.2);
  CHECK(optimal_allocation(pop, 2).treated == std::vector<std::size_t>{1, 2});
  CHECK(optimal_allocation(pop, 0).treated.empty());
  CHECK(optimal_allocation(pop, 3).treated == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(optimal_allocation(pop, 4), std::invalid_argument);

  auto tied = single_unit({0.5, 0.5}, 0.2);
  CHECK(optimal_allocation(tied, 1).treated == std::vector<std::size_t>{0});
}

TEST_CASE("brute_force_opt_value matches hand examples", "[core]") {
  auto pop = single_unit({0.0, 0.5, 0.95}, 0.1);
  CHECK(brute_force_opt_value(pop, 2) == Catch::Approx(0.2));
  CHECK(brute_force_opt_value(pop, 0) == 0.0);

  auto flat = single_unit(std::vector<double>(7, 0.0), 0.1);
  for (std::size_t k = 0; k <= 7; ++k) {
    CHECK(brute_force_opt_value(flat, k) == Catch::Approx(0.1 * k));
  }
  auto big = single_unit(std::vector<double>(26, 0.0), 0.1);
  CHECK_THROWS_AS(brute_force_opt_value(big, 3), std::invalid_argument);
}

TEST_CASE("optimal allocation value equals exhaustive maximum", "[core]") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t p = 4 + rng.uniform_int(13);
    double delta_w = 0.05 + 0.9 * rng.uniform();
    auto pop = random_population(rng, p, delta_w);
    std::size_t k = rng.uniform_int(p + 1);
    double greedy = allocation_value(optimal_allocation(pop, k), pop);
    double exact = brute_force_opt_value(pop, k);
    REQUIRE(greedy == Catch::Approx(exact).margin(1e-12));
  }
}

TEST_CASE("regret report fields", "[core]") {
  auto pop = single_unit({0.0, 0.0, 1.0, 1.0}, 0.5);
  auto opt = optimal_allocation(pop, 2);
  auto r0 = regret(opt, pop, 2);
  CHECK(r0.regret == Catch::Approx(0.0).margin(1e-15));

  auto r1 = regret({{2, 3}, 2}, pop, 2);
  CHECK(r1.opt_value == Catch::Approx(1.0));
  CHECK(r1.value == Catch::Approx(0.0).margin(1e-15));
  CHECK(r1.regret == Catch::Approx(1.0));
  CHECK(r1.normalized_regret == Catch::Approx(2.0));

  auto r2 = regret({{0, 3}, 2}, pop, 2);
  CHECK(r2.regret == Catch::Approx(0.5));
}

TEST_CASE("regret is non-negative and normalization holds", "[core]") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t p = 3 + rng.uniform_int(18);
    auto pop = random_population(rng, p, 0.05 + 0.9 * rng.uniform());
    std::size_t k = rng.uniform_int(p + 1);
    auto alloc = random_allocation(pop, k, rng.next_u64());
    auto rep = regret(alloc, pop, k);
    CHECK(rep.regret >= -1e-12);
    CHECK(rep.normalized_regret ==
          Catch::Approx(rep.regret / pop.delta_w).margin(1e-12));
  }
}

TEST_CASE("unit_profile counts high-welfare fractions", "[core]") {
  auto low = Population::with_uniform_units({0.0, 0.0}, 1, 0.2);
  CHECK(unit_profile(low).rho == std::vector<double>{0.0});

  auto mixed = Population::with_uniform_units({0.9, 0.1}, 1, 0.2);
  CHECK(unit_profile(mixed).rho == std::vector<double>{0.5});

  auto all_high = Population::with_uniform_units({1.0, 1.0, 1.0, 1.0}, 2, 0.3);
  CHECK(unit_profile(all_high).rho == std::vector<double>({1.0, 1.0}));
}

TEST_CASE("rho_bar_k never exceeds rho_bar_m", "[core]") {
  Rng rng(88);
  for (int trial = 0; trial < 500; ++trial) {
    UnitProfile profile;
    std::size_t m = 2 + rng.uniform_int(30);
    profile.rho.resize(m);
    for (auto& r : profile.rho) r = rng.uniform();
    for (std::size_t k = 1; k <= m; ++k) {
      CHECK(profile.rho_bar_k(k) <= profile.rho_bar_m() + 1e-12);
    }
  }
}

TEST_CASE("gini matches hand examples and both forms agree", "[core]") {
  CHECK(gini({{0.5, 0.5}}) == Catch::Approx(0.0).margin(1e-15));
  CHECK(gini({{0.0, 1.0}}) == Catch::Approx(0.5));
  CHECK(gini({{0.2, 0.4, 0.6}}) == Catch::Approx(2.0 / 9.0));
  CHECK_THROWS_AS(gini({{0.0, 0.0}}), std::domain_error);

  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    UnitProfile profile;
    profile.rho.resize(2 + rng.uniform_int(40));
    for (auto& r : profile.rho) r = rng.uniform();
    double g = gini(profile);
    CHECK(g >= 0.0);
    CHECK(g < 1.0);
    CHECK(g == Catch::Approx(gini_double_sum(profile)).margin(1e-11));
  }
}

// The Gini baseline inequality in its provable form (K = 1):
// rho_bar_M - min_j rho_j >= G * M * rho_bar_M / (M - 1).
TEST_CASE("gini baseline lower-bounds the bottom-unit gap", "[core]") {
  Rng rng(123);
  for (int trial = 0; trial < 2000; ++trial) {
    UnitProfile profile;
    std::size_t m = 2 + rng.uniform_int(49);
    profile.rho.resize(m);
    for (auto& r : profile.rho) r = rng.uniform();
    double mean = profile.rho_bar_m();
    if (mean <= 0.0) continue;
    double g = gini(profile);
    double gap = mean - profile.rho_bar_k(1);
    CHECK(gap >= g * m * mean / (m - 1.0) - 1e-9);
  }
}

TEST_CASE("random_allocation edge cases", "[core]") {
  auto pop = single_unit({0.1, 0.2, 0.3, 0.4}, 0.5);
  auto all = random_allocation(pop, 4, 7);
  CHECK(all.treated == std::vector<std::size_t>({0, 1, 2, 3}));

  // No high-welfare individuals: every k-subset is optimal.
  auto flat = single_unit(std::vector<double>(30, 0.0), 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    auto alloc = random_allocation(flat, 7, 1000 + trial);
    CHECK(regret(alloc, flat, 7).regret == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("random_allocation mean regret matches hypergeometric expectation",
          "[core][montecarlo]") {
  // P = 100, 30 high-welfare (w = 1), k = 10: expected normalized regret is
  // k * rho_bar = 3. Per-trial variance comes from the hypergeometric count.
  std::vector<double> w(100, 0.0);
  for (int i = 0; i < 30; ++i) w[i] = 1.0;
  auto pop = Population::with_uniform_units(std::move(w), 1, 0.5);
  const int trials = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto rep = regret(random_allocation(pop, 10, derive_seed(42, {(std::uint64_t)t})),
                      pop, 10);
    sum += rep.normalized_regret;
    sumsq += rep.normalized_regret * rep.normalized_regret;
  }
  double mean = sum / trials;
  double var = sumsq / trials - mean * mean;
  double se = std::sqrt(var / trials);
  CHECK(std::abs(mean - 3.0) <= 3.0 * se + 1e-9);
}

TEST_CASE("population csv round-trips", "[core]") {
  Rng rng(31);
  auto pop = random_population(rng, 40, 0.25);
  pop = Population::with_uniform_units(std::move(pop.welfare), 8, 0.25);
  std::stringstream buf;
  write_population_csv(buf, pop);
  auto back = read_population_csv(buf, 0.25);
  CHECK(back.welfare == pop.welfare);
  CHECK(back.unit_of == pop.unit_of);

  std::stringstream bad("welfare,unit\n0.5,0\n");
  CHECK_THROWS_AS(read_population_csv(bad, 0.5), std::invalid_argument);
}

TEST_CASE("population validation", "[core]") {
  CHECK_THROWS_AS(Population::with_uniform_units({0.1, 0.2, 0.3}, 2, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(Population::with_uniform_units({0.1, 1.2}, 1, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(Population::with_uniform_units({0.1, 0.2}, 1, 0.0),
                  std::invalid_argument);
  auto pop = Population::with_uniform_units({0.1, 0.2, 0.3, 0.4}, 2, 0.5);
  CHECK(pop.unit_count() == 2);
  CHECK(pop.min_unit_size() == 2);
  CHECK(pop.unit_members()[1] == std::vector<std::size_t>({2, 3}));
}
