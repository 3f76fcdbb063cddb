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

#ifndef PRIVALLOC_LEARN_HPP_
#define PRIVALLOC_LEARN_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "privalloc/alloc.hpp"
#include "privalloc/core.hpp"
#include "privalloc/dp.hpp"
#include "privalloc/rng.hpp"

namespace privalloc::learn {

struct LabeledExample {
  std::vector<double> features;
  int label = 0;  // y = I[w > 1 - delta_w]
};

// Squared-loss risk split into excess over Bayes and the Bayes noise floor.
struct RiskDecomposition {
  double total = 0.0;        // alpha = excess + irreducible
  double excess = 0.0;       // E[(f(x) - eta(x))^2]
  double irreducible = 0.0;  // sigma^2 = E[eta (1 - eta)]
  double se_excess = 0.0;
  double se_irreducible = 0.0;
  double measured_total = 0.0;  // E[(f(x) - y)^2] on fresh labels
  double se_measured = 0.0;
};

struct LearnerSpec {
  double lipschitz = 1.0;   // per-example gradient clip L
  double diameter = 2.0;    // parameter ball diameter D
  std::size_t dim = 2;      // feature dimension p
  double smoothness = 2.0;  // xi

  void validate() const {
    if (!(lipschitz > 0.0 && diameter > 0.0 && smoothness > 0.0) || dim == 0) {
      throw std::invalid_argument("LearnerSpec: all fields must be positive");
    }
  }
};

struct LinearModel {
  std::vector<double> theta;
  bool smoothness_warning = false;

  double predict(const std::vector<double>& x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size() && i < x.size(); ++i) {
      acc += theta[i] * x[i];
    }
    return acc;
  }

  double predict_clipped(const std::vector<double>& x) const {
    return std::clamp(predict(x), 0.0, 1.0);
  }
};

// Two-group conditional-mean family. Each individual has a latent position
// u ~ Uniform[-1, 1]; the model-visible features are (1, sign(u), noise...),
// so eta = (eta_low + eta_high)/2 + sign(u) (eta_high - eta_low)/2 is exactly
// linear in the features (the Bayes predictor is in class, E* = 0). The
// position itself stays out of the feature vector and only drives the
// axis-aligned partition into units.
struct SyntheticDistribution {
  double eta_low = 0.2;
  double eta_high = 0.8;
  std::size_t dim = 2;  // >= 2: constant + sign + (dim - 2) noise features

  struct Sample {
    std::vector<double> features;
    double position = 0.0;
    double eta = 0.0;
    int label = 0;
  };

  void validate() const {
    if (dim < 2) throw std::invalid_argument("SyntheticDistribution: dim < 2");
    if (!(eta_low >= 0.0 && eta_low <= 1.0 && eta_high >= 0.0 && eta_high <= 1.0)) {
      throw std::invalid_argument("SyntheticDistribution: eta outside [0, 1]");
    }
  }

  double eta_at(double position) const {
    return position < 0.0 ? eta_low : eta_high;
  }

  double irreducible_risk() const {
    return 0.5 * (eta_low * (1.0 - eta_low) + eta_high * (1.0 - eta_high));
  }

  double mean_eta() const { return 0.5 * (eta_low + eta_high); }

  std::vector<double> bayes_parameters() const {
    std::vector<double> theta(dim, 0.0);
    theta[0] = 0.5 * (eta_low + eta_high);
    theta[1] = 0.5 * (eta_high - eta_low);
    return theta;
  }

  Sample draw(Rng& rng) const {
    Sample s;
    s.position = rng.uniform(-1.0, 1.0);
    s.features.resize(dim);
    s.features[0] = 1.0;
    s.features[1] = s.position < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 2; i < dim; ++i) s.features[i] = rng.normal();
    s.eta = eta_at(s.position);
    s.label = rng.uniform() < s.eta ? 1 : 0;
    return s;
  }
};

namespace detail {

inline void project_to_ball(std::vector<double>& theta, double radius) {
  double norm_sq = 0.0;
  for (double t : theta) norm_sq += t * t;
  if (norm_sq > radius * radius) {
    double scale = radius / std::sqrt(norm_sq);
    for (double& t : theta) t *= scale;
  }
}

}  // namespace detail

// Single-pass noisy projected SGD for the squared loss on a linear model.
// Disjoint batches, per-example gradients clipped to L, per-step Gaussian
// noise calibrated for psi-zCDP under replace-one adjacency (sensitivity of a
// batch-mean gradient is 2L/b); disjoint batches compose in parallel, so the
// full pass is psi-zCDP. Parameters live in the ball of diameter D.
inline LinearModel private_learner_train(const std::vector<LabeledExample>& data,
                                         const LearnerSpec& spec, double psi,
                                         std::uint64_t seed) {
  spec.validate();
  if (data.empty()) throw std::invalid_argument("private_learner_train: no data");
  if (!(psi > 0.0)) throw std::invalid_argument("private_learner_train: psi <= 0");
  const std::size_t n = data.size();
  const std::size_t p = spec.dim;
  const double radius = spec.diameter / 2.0;

  LinearModel model;
  model.theta.assign(p, 0.0);
  // Smoothness condition of the learner contract; violation degrades the
  // guarantee but the optimizer still runs.
  double lhs = (spec.diameter / spec.lipschitz) *
               std::min(4.0 / std::sqrt(double(n)),
                        std::isinf(psi) ? 4.0 / std::sqrt(double(n))
                                        : std::sqrt(2.0 * psi) / std::sqrt(double(p)));
  model.smoothness_warning = lhs > 2.0 / spec.smoothness;

  const std::size_t batch = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(std::sqrt(double(n)))));
  const std::size_t steps = (n + batch - 1) / batch;
  const double step_scale = spec.diameter / spec.lipschitz;

  Rng rng(seed);
  std::vector<double> grad(p);
  std::vector<double> example_grad(p);
  std::vector<double> average(p, 0.0);
  std::size_t averaged = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    std::size_t begin = t * batch;
    std::size_t end = std::min(begin + batch, n);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ex = data[i];
      double residual = model.predict(ex.features) - double(ex.label);
      double norm_sq = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        example_grad[j] =
            j < ex.features.size() ? 2.0 * residual * ex.features[j] : 0.0;
        norm_sq += example_grad[j] * example_grad[j];
      }
      double norm = std::sqrt(norm_sq);
      double scale = norm > spec.lipschitz ? spec.lipschitz / norm : 1.0;
      for (std::size_t j = 0; j < p; ++j) grad[j] += scale * example_grad[j];
    }
    double count = double(end - begin);
    for (double& g : grad) g /= count;
    if (!std::isinf(psi)) {
      double noise_std = (2.0 * spec.lipschitz / count) / std::sqrt(2.0 * psi);
      for (double& g : grad) g += rng.normal() * noise_std;
    }
    double gamma = step_scale / std::sqrt(double(t + 1));
    for (std::size_t j = 0; j < p; ++j) model.theta[j] -= gamma * grad[j];
    detail::project_to_ball(model.theta, radius);
    // Suffix averaging over the second half of the pass.
    if (2 * (t + 1) > steps) {
      for (std::size_t j = 0; j < p; ++j) average[j] += model.theta[j];
      ++averaged;
    }
  }
  if (averaged > 0) {
    for (std::size_t j = 0; j < p; ++j) model.theta[j] = average[j] / averaged;
    detail::project_to_ball(model.theta, radius);
  }
  return model;
}

// Monte Carlo estimate of the excess / irreducible split against the known
// conditional mean, plus the realized squared loss on fresh labels.
inline RiskDecomposition risk_decompose(const LinearModel& model,
                                        const SyntheticDistribution& dist,
                                        std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("risk_decompose: trials == 0");
  dist.validate();
  Rng rng(seed);
  double sum_e = 0.0, sumsq_e = 0.0;
  double sum_i = 0.0, sumsq_i = 0.0;
  double sum_t = 0.0, sumsq_t = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto s = dist.draw(rng);
    double pred = model.predict(s.features);
    double e = (pred - s.eta) * (pred - s.eta);
    double i = s.eta * (1.0 - s.eta);
    double tot = (pred - s.label) * (pred - s.label);
    sum_e += e;
    sumsq_e += e * e;
    sum_i += i;
    sumsq_i += i * i;
    sum_t += tot;
    sumsq_t += tot * tot;
  }
  auto finalize = [trials](double sum, double sumsq, double& mean, double& se) {
    mean = sum / double(trials);
    double var = std::max(0.0, sumsq / double(trials) - mean * mean);
    se = std::sqrt(var / double(trials));
  };
  RiskDecomposition out;
  finalize(sum_e, sumsq_e, out.excess, out.se_excess);
  finalize(sum_i, sumsq_i, out.irreducible, out.se_irreducible);
  finalize(sum_t, sumsq_t, out.measured_total, out.se_measured);
  out.total = out.excess + out.irreducible;
  return out;
}

// A population drawn from the synthetic distribution: welfare is the realized
// binary label (delta_w = 1), units are the occupied cells of an axis-aligned
// grid over the latent position. Empty cells are dropped by compaction, so
// unit ids are dense; `cells` records the grid size |P| used for bounds.
struct LearnPopulation {
  Population pop;
  std::vector<std::vector<double>> features;
  std::vector<double> eta;
  std::size_t cells = 0;
};

inline LearnPopulation sample_learn_population(const SyntheticDistribution& dist,
                                               std::size_t population,
                                               std::size_t cells,
                                               std::uint64_t seed) {
  if (cells == 0) throw std::invalid_argument("sample_learn_population: cells == 0");
  dist.validate();
  Rng rng(seed);
  LearnPopulation out;
  out.cells = cells;
  out.features.reserve(population);
  out.eta.reserve(population);
  std::vector<std::uint32_t> raw_cell(population);
  out.pop.delta_w = 1.0;
  out.pop.welfare.resize(population);
  for (std::size_t i = 0; i < population; ++i) {
    auto s = dist.draw(rng);
    out.features.push_back(std::move(s.features));
    out.eta.push_back(s.eta);
    out.pop.welfare[i] = double(s.label);
    auto cell = static_cast<std::uint32_t>(
        std::min<double>(double(cells) - 1.0,
                         std::floor((s.position + 1.0) / 2.0 * double(cells))));
    raw_cell[i] = cell;
  }
  // Compact occupied cells into dense unit ids.
  std::vector<std::int64_t> remap(cells, -1);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < population; ++i) {
    if (remap[raw_cell[i]] < 0) remap[raw_cell[i]] = next++;
  }
  out.pop.unit_of.resize(population);
  for (std::size_t i = 0; i < population; ++i) {
    out.pop.unit_of[i] = static_cast<std::uint32_t>(remap[raw_cell[i]]);
  }
  return out;
}

// Prediction-ranked individual-level allocation: rank by clipped predicted
// scores ascending and treat k'. Finite psi routes through the Joint-zCDP
// individual-level mechanism at oblivious-adversary parameters.
inline Allocation ila_predictive(const LearnPopulation& lp,
                                 const LinearModel& model, std::size_t k_prime,
                                 double psi, double beta, std::uint64_t seed) {
  const std::size_t p = lp.pop.size();
  if (k_prime > p) throw std::invalid_argument("ila_predictive: k' > P");
  std::vector<double> scores(p);
  for (std::size_t i = 0; i < p; ++i) {
    scores[i] = model.predict_clipped(lp.features[i]);
  }
  if (std::isinf(psi)) {
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });
    Allocation alloc;
    alloc.budget = k_prime;
    alloc.treated.assign(order.begin(), order.begin() + k_prime);
    std::sort(alloc.treated.begin(), alloc.treated.end());
    return alloc;
  }
  auto params = alloc::ila_params_adversarial(p, k_prime, psi, beta);
  auto outcome = alloc::ila_private_on_scores(scores, params, seed);
  outcome.treated.budget = k_prime;
  return outcome.treated;
}

// Prediction-ranked unit-level allocation over the partition-induced units:
// unit scores are mean clipped predictions; the private route releases them
// with the private-membership machinery (sensitivity sqrt(2)/N at psi1, then
// the individual-level mechanism at psi2 on the per-unit scores).
inline Allocation ula_predictive(const LearnPopulation& lp,
                                 const LinearModel& model, std::size_t k,
                                 double psi1, double psi2, double beta,
                                 std::uint64_t seed) {
  const auto members = lp.pop.unit_members();
  const std::size_t m = members.size();
  std::vector<double> rho_hat(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (members[j].empty()) throw std::invalid_argument("ula_predictive: empty unit");
    for (std::size_t i : members[j]) {
      rho_hat[j] += model.predict_clipped(lp.features[i]);
    }
    rho_hat[j] /= double(members[j].size());
  }
  if (std::isinf(psi1) && std::isinf(psi2)) {
    Rng marginal_rng(derive_seed(seed, {4}));
    auto out = alloc::greedy_unit_allocation(rho_hat, lp.pop, k, marginal_rng);
    out.treated.budget = k;
    return out.treated;
  }
  const auto n_min = double(lp.pop.min_unit_size());
  if (!std::isinf(psi1)) {
    Rng noise_rng(derive_seed(seed, {3}));
    for (double& r : rho_hat) {
      r += noise_rng.normal() / (n_min * std::sqrt(psi1));
    }
  }
  std::vector<double> scores(lp.pop.size());
  for (std::size_t i = 0; i < lp.pop.size(); ++i) {
    scores[i] = std::clamp(rho_hat[lp.pop.unit_of[i]], 0.0, 1.0);
  }
  auto params = alloc::ila_params_adversarial(lp.pop.size(), k, psi2, beta);
  auto outcome = alloc::ila_private_on_scores(scores, params, seed);
  outcome.treated.budget = k;
  return outcome.treated;
}

// --- sample-size selection ---

namespace detail {
inline std::size_t cap_count(double value, std::size_t cap) {
  if (!(value > 0.0)) return 0;
  if (value >= double(cap)) return cap;
  return static_cast<std::size_t>(std::ceil(value));
}
}  // namespace detail

// Generic choice (no risk floor):
//   n = max( (P/lambda sqrt(10 L D (2 psi)^{-1/2} sqrt(p)))^{2/3},
//            (P/lambda sqrt(10 L D))^{4/5} )
// Instance-specific with a floor V > 0 on the optimal risk:
//   n = max( sqrt(5 P L D sqrt(p) / (lambda sqrt(2 psi V))),
//            (5 P L D / (lambda sqrt(V)))^{2/3} ), capped at P.
inline std::size_t sample_size_for_floor(std::size_t population, double lambda,
                                         double psi, const LearnerSpec& spec,
                                         std::optional<double> floor) {
  spec.validate();
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("sample size: lambda must be > 0");
  }
  double p = double(population);
  double ld = spec.lipschitz * spec.diameter;
  double sqrt_p_dim = std::sqrt(double(spec.dim));
  if (!floor) {
    double privacy = std::isinf(psi)
                         ? 0.0
                         : std::pow(p / lambda *
                                        std::sqrt(10.0 * ld * sqrt_p_dim /
                                                  std::sqrt(2.0 * psi)),
                                    2.0 / 3.0);
    double statistical = std::pow(p / lambda * std::sqrt(10.0 * ld), 0.8);
    return detail::cap_count(std::max(privacy, statistical), population);
  }
  if (!(*floor > 0.0)) {
    throw std::invalid_argument("sample size: risk floor must be > 0");
  }
  double privacy = std::isinf(psi)
                       ? 0.0
                       : std::sqrt(5.0 * p * ld * sqrt_p_dim /
                                   (lambda * std::sqrt(2.0 * psi * *floor)));
  double statistical =
      std::pow(5.0 * p * ld / (lambda * std::sqrt(*floor)), 2.0 / 3.0);
  return detail::cap_count(std::max(privacy, statistical), population);
}

inline std::size_t ila_sample_size(std::size_t population, double lambda,
                                   double psi, const LearnerSpec& spec,
                                   std::optional<double> risk_floor = {}) {
  return sample_size_for_floor(population, lambda, psi, spec, risk_floor);
}

inline std::size_t ula_sample_size(std::size_t population, double lambda,
                                   double psi, const LearnerSpec& spec,
                                   std::optional<double> excess_floor = {}) {
  // Same formula with the excess-risk floor in place of the total-risk floor.
  return sample_size_for_floor(population, lambda, psi, spec, excess_floor);
}

// --- regime analyses ---

struct LearnRegime {
  bool ula_dominant = false;
  double product = 0.0;  // (1/sigma)(k/P)(1-G) rho_bar
  bool sigma_zero_flag = false;
  std::optional<double> general_lhs;  // 2 (k/P)(1-G) rho_bar sqrt(L*)
  std::optional<double> general_rhs;  // sigma^2
};

// ULA dominates ILA asymptotically when the predictability-budget-equality-
// welfare product is below 1/2 (Bayes-in-class case). sigma = 0 means
// perfectly predictable outcomes: ILA-favorable by convention.
inline LearnRegime classify_regime_learning(double sigma, std::size_t k,
                                            std::size_t population, double g,
                                            double rho_bar_m,
                                            std::optional<double> l_star = {}) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("classify_regime_learning: sigma < 0");
  LearnRegime out;
  double ratio = double(k) / double(population);
  if (sigma == 0.0) {
    out.sigma_zero_flag = true;
    out.ula_dominant = false;
    out.product = std::numeric_limits<double>::infinity();
  } else {
    out.product = (1.0 / sigma) * ratio * (1.0 - g) * rho_bar_m;
    out.ula_dominant = out.product <= 0.5;
  }
  if (l_star) {
    out.general_lhs = 2.0 * ratio * (1.0 - g) * rho_bar_m * std::sqrt(*l_star);
    out.general_rhs = sigma * sigma;
  }
  return out;
}

enum class DataStrategy { kSampling, kModeling, kEither };

inline const char* to_string(DataStrategy s) {
  switch (s) {
    case DataStrategy::kSampling: return "sampling";
    case DataStrategy::kModeling: return "modeling";
    case DataStrategy::kEither: return "either";
  }
  return "?";
}

struct ModelingAdvice {
  DataStrategy ula_choice = DataStrategy::kSampling;
  double sampling_excess = 0.0;   // (P^2 M lambda)^{1/3}
  double modeling_excess = 0.0;   // lambda^{1/5} P^{4/5} + P sqrt(E*)
  std::optional<bool> ila_modeling_favored;
};

// Compares the leading excess-regret growth of pure sampling against
// model-based allocation for the unit-level strategy. The comparison
// reproduces the asymptotic regimes exactly: equality at M = (P/lambda)^{2/5}
// when E* = 0, and the lambda ~ (E*)^{3/2} frontier when M = Theta(P).
inline ModelingAdvice modeling_vs_sampling(std::size_t population,
                                           std::size_t units, double lambda,
                                           double e_star,
                                           std::optional<std::size_t> k = {},
                                           std::optional<double> l_star = {}) {
  if (!(lambda > 0.0) || !(e_star >= 0.0) || population == 0 || units == 0) {
    throw std::invalid_argument("modeling_vs_sampling: inputs must be positive");
  }
  double p = double(population);
  double m = double(units);
  ModelingAdvice advice;
  advice.sampling_excess = std::cbrt(p * p * m * lambda);
  advice.modeling_excess =
      std::pow(lambda, 0.2) * std::pow(p, 0.8) + p * std::sqrt(e_star);
  double hi = std::max(advice.sampling_excess, advice.modeling_excess);
  if (std::abs(advice.sampling_excess - advice.modeling_excess) <= 1e-9 * hi) {
    advice.ula_choice = DataStrategy::kEither;
  } else if (advice.modeling_excess < advice.sampling_excess) {
    advice.ula_choice = DataStrategy::kModeling;
  } else {
    advice.ula_choice = DataStrategy::kSampling;
  }
  if (k && l_star) {
    double kk = double(*k);
    advice.ila_modeling_favored =
        p * lambda * kk / (p * lambda + kk) > p * std::sqrt(*l_star);
  }
  return advice;
}

// --- printed bounds ---

// Expected normalized regret of prediction-ranked individual allocation with
// k' treatments from a model with squared-loss risk alpha:
// (k - k') + k' eta_bar_{k'} + P sqrt(alpha).
inline double ila_prediction_bound_expectation(std::size_t k, std::size_t k_prime,
                                               double eta_bar, double alpha,
                                               std::size_t population) {
  return double(k - k_prime) + double(k_prime) * eta_bar +
         double(population) * std::sqrt(alpha);
}

// High-probability variant: + P^{3/4} sqrt(ln(1/beta)/2).
inline double ila_prediction_bound_whp(std::size_t k, std::size_t k_prime,
                                       double eta_bar, double alpha,
                                       std::size_t population, double beta) {
  return ila_prediction_bound_expectation(k, k_prime, eta_bar, alpha, population) +
         std::pow(double(population), 0.75) *
             std::sqrt(std::log(1.0 / beta) / 2.0);
}

// Expected normalized regret of prediction-ranked unit allocation:
// k rho_bar_K + sqrt(P |cells| sigma^2) + P sqrt(alpha - sigma^2).
inline double ula_prediction_bound(std::size_t k, double rho_bar_k,
                                   std::size_t population, std::size_t cells,
                                   double alpha, double sigma_sq) {
  double excess = std::max(0.0, alpha - sigma_sq);
  return double(k) * rho_bar_k +
         std::sqrt(double(population) * double(cells) * sigma_sq) +
         double(population) * std::sqrt(excess);
}

// --- model export: flat parameter list with spec metadata ---

inline std::string serialize_model(const LinearModel& model,
                                   const LearnerSpec& spec) {
  std::ostringstream out;
  out << "dim = " << spec.dim << "\n";
  out << "lipschitz = " << spec.lipschitz << "\n";
  out << "diameter = " << spec.diameter << "\n";
  out << "smoothness = " << spec.smoothness << "\n";
  for (std::size_t i = 0; i < model.theta.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", model.theta[i]);
    out << "theta_" << i << " = " << buf << "\n";
  }
  return out.str();
}

inline std::pair<LinearModel, LearnerSpec> parse_model(const std::string& text) {
  LinearModel model;
  LearnerSpec spec;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    double value = std::stod(line.substr(eq + 1));
    if (key == "dim") {
      spec.dim = static_cast<std::size_t>(value);
    } else if (key == "lipschitz") {
      spec.lipschitz = value;
    } else if (key == "diameter") {
      spec.diameter = value;
    } else if (key == "smoothness") {
      spec.smoothness = value;
    } else if (key.rfind("theta_", 0) == 0) {
      auto idx = static_cast<std::size_t>(std::stoul(key.substr(6)));
      if (model.theta.size() <= idx) model.theta.resize(idx + 1, 0.0);
      model.theta[idx] = value;
    }
  }
  return {model, spec};
}

}  // namespace privalloc::learn

#endif  // PRIVALLOC_LEARN_HPP_
