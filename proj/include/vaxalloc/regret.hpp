#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vaxalloc/epidemic.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"
#include "vaxalloc/objective.hpp"
#include "vaxalloc/random.hpp"
#include "vaxalloc/solvers.hpp"

namespace vaxalloc {

/// Sampling error of externally estimated SIR rates. Each rate is perturbed by
/// independent Gaussian noise with standard deviation `scale` (default
/// 1/(2 sqrt(n))) and clipped to [0, 1]. With that scale the Gaussian tail
/// gives P(|error| >= eps) <= 2 exp(-2 n eps^2).
struct EstimationNoiseModel {
  std::uint64_t n_external = 1;
  std::optional<double> scale_override;

  explicit EstimationNoiseModel(std::uint64_t n, std::optional<double> scale = std::nullopt)
      : n_external(n), scale_override(scale) {
    if (n < 1) throw ParameterError("external sample size must be at least 1");
    if (scale && !(*scale >= 0.0)) throw ParameterError("noise scale must be non-negative");
  }

  double scale() const { return scale_override.value_or(0.5 / std::sqrt(static_cast<double>(n_external))); }
};

/// Perturbs beta_11, beta_12, beta_21, beta_22, gamma_1, gamma_2 in that
/// order. gamma_s is additionally capped at 1 - delta_s.
inline SirParams sample_estimates(const SirParams& params, const EstimationNoiseModel& noise, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  const double sigma = noise.scale();
  auto perturb = [&](double x) { return std::clamp(x + sigma * standard(rng), 0.0, 1.0); };
  SirParams est = params;
  for (auto& row : est.beta)
    for (double& b : row) b = perturb(b);
  for (std::size_t s = 0; s < 2; ++s) est.gamma[s] = std::min(perturb(est.gamma[s]), 1.0 - est.delta[s]);
  return est;
}

/// (2 + 1/e) sqrt((1 + ln 2) / 2), the constant of the expected-regret bound.
inline double regret_constant() {
  return (2.0 + std::exp(-1.0)) * std::sqrt((1.0 + std::log(2.0)) / 2.0);
}

/// Upper bound on expected regret of greedy with estimated parameters:
///
///   C g [d min(N_M, d) + 2 d N_M + min(N_I, d)] / N * sqrt(1/n) + F(V*) / e
///
/// N_M is the maximum degree, N_I the number of infected units and g the
/// largest weight.
inline double regret_bound(std::size_t n_units, std::size_t d, std::size_t n_max_degree, std::size_t n_infected,
                             double g_max, std::uint64_t n_external, double f_star) {
  if (n_external < 1) throw ParameterError("external sample size must be at least 1");
  if (n_units < 1) throw ParameterError("n_units must be at least 1");
  const double dd = static_cast<double>(d);
  const double nm = static_cast<double>(n_max_degree);
  const double complexity =
      dd * std::min(nm, dd) + 2.0 * dd * nm + static_cast<double>(std::min(n_infected, d));
  return regret_constant() * g_max * complexity / static_cast<double>(n_units) /
             std::sqrt(static_cast<double>(n_external)) +
         f_star * std::exp(-1.0);
}

/// Per-entry bounds on the mean absolute estimation error of the objective
/// coefficients.
struct ElementBounds {
  std::vector<double> linear;             // bound on E|c_hat_i - c_i|
  std::vector<Interaction> interactions;  // bound on E|w_hat_ij - w_ij| for every adjacent (i, j)

  double interaction(UnitId i, UnitId j) const {
    auto it = std::lower_bound(interactions.begin(), interactions.end(), std::pair{i, j},
                               [](const Interaction& t, std::pair<UnitId, UnitId> key) {
                                 return std::pair{t.row, t.col} < key;
                               });
    return it != interactions.end() && it->row == i && it->col == j ? it->value : 0.0;
  }
};

/// sqrt((1 + ln 2) / (2n)) A_ij g_i / N for interactions and
/// sqrt((1 + ln 2) / (2n)) I_i g_i / N for linear coefficients.
inline ElementBounds coefficient_error_bounds(const ContactGraph& graph, const Population& pop,
                                           std::uint64_t n_external) {
  if (n_external < 1) throw ParameterError("external sample size must be at least 1");
  if (pop.n_units() != graph.n_units()) throw ParameterError("population size does not match the graph");
  const double n = static_cast<double>(graph.n_units());
  const double rate = std::sqrt((1.0 + std::log(2.0)) / (2.0 * static_cast<double>(n_external)));
  ElementBounds out;
  out.linear.resize(graph.n_units());
  for (UnitId i = 0; i < graph.n_units(); ++i) {
    const double per_unit = rate * pop.weight[i] / n;
    out.linear[i] = pop.state[i] == HealthState::Infected ? per_unit : 0.0;
    for (UnitId j : graph.neighbors(i)) out.interactions.push_back({i, j, per_unit});
  }
  return out;
}

/// Regret of greedy run on estimated parameters, split as
/// F(V*) - F(V^) = [F(V*) - Fn(V^*)] + [Fn(V^*) - Fn(V^)] + [Fn(V^) - F(V^)].
struct RegretReport {
  double term1 = 0.0;  // estimation: F(V*) - Fn(V^*)
  double term2 = 0.0;  // optimization: Fn(V^*) - Fn(V^)
  double term3 = 0.0;  // evaluation: Fn(V^) - F(V^)
  double total = 0.0;  // F(V*) - F(V^)
  double f_star = 0.0; // F(V*)
  std::optional<double> bound;
  std::size_t n_max_degree = 0;
  std::size_t n_infected = 0;
  double g_max = 0.0;
  std::size_t d = 0;
  bool approximate = false;  // V* and V^* from greedy rather than exhaustive search
};

/// Builds F from `true_params` and Fn from `est_params`, then takes V* and
/// V^* by brute force (or greedy when `use_brute` is false) and V^ by greedy
/// on Fn. The bound is filled when `n_external` is given.
inline RegretReport empirical_regret(const ContactGraph& graph, const Population& pop, const SirParams& true_params,
                                     const SirParams& est_params, std::size_t d, bool use_brute,
                                     std::optional<std::uint64_t> n_external = std::nullopt,
                                     double budget = kDefaultBruteForceBudget) {
  const auto truth = build_context(graph, pop, true_params);
  const auto estimate = build_context(graph, pop, est_params);

  RegretReport r;
  r.d = d;
  r.n_max_degree = graph.max_degree();
  r.n_infected = pop.count(HealthState::Infected);
  r.g_max = pop.max_weight();
  r.approximate = !use_brute;

  if (d > 0) {
    auto optimum = [&](const ObjectiveContext& ctx) {
      return use_brute ? brute_force(ctx, d, budget).allocation : greedy_capacity(ctx, d).allocation;
    };
    const Allocation oracle = optimum(truth);
    const Allocation est_optimum = optimum(estimate);
    const Allocation chosen = greedy_capacity(estimate, d).allocation;

    const double f_oracle = eval_f(truth, oracle);
    const double fn_est_optimum = eval_f(estimate, est_optimum);
    const double fn_chosen = eval_f(estimate, chosen);
    const double f_chosen = eval_f(truth, chosen);
    r.term1 = f_oracle - fn_est_optimum;
    r.term2 = fn_est_optimum - fn_chosen;
    r.term3 = fn_chosen - f_chosen;
    r.total = f_oracle - f_chosen;
    r.f_star = f_oracle;
  }
  if (n_external)
    r.bound = regret_bound(graph.n_units(), d, r.n_max_degree, r.n_infected, r.g_max, *n_external, r.f_star);
  return r;
}

/// Monte Carlo averages of the regret decomposition at one sample size.
struct RegretSummary {
  std::uint64_t n_external = 0;
  std::size_t replications = 0;
  double mean_total = 0.0;
  double mean_term1 = 0.0;
  double mean_term2 = 0.0;
  double mean_term3 = 0.0;
  double mean_estimation_error = 0.0;  // mean of |term1| + |term3|
  double bound = 0.0;
  double f_star = 0.0;
  bool approximate = false;
};

/// Replication r draws its estimates with seed derive_seed(seed, r).
inline RegretSummary regret_monte_carlo(const ContactGraph& graph, const Population& pop, const SirParams& truth,
                                        std::size_t d, const EstimationNoiseModel& noise, std::size_t replications,
                                        std::uint64_t seed, bool use_brute) {
  if (replications < 1) throw ParameterError("replications must be at least 1");
  RegretSummary s;
  s.n_external = noise.n_external;
  s.replications = replications;
  s.approximate = !use_brute;
  for (std::size_t r = 0; r < replications; ++r) {
    const SirParams est = sample_estimates(truth, noise, derive_seed(seed, r));
    const RegretReport rep = empirical_regret(graph, pop, truth, est, d, use_brute, noise.n_external);
    s.mean_total += rep.total;
    s.mean_term1 += rep.term1;
    s.mean_term2 += rep.term2;
    s.mean_term3 += rep.term3;
    s.mean_estimation_error += std::abs(rep.term1) + std::abs(rep.term3);
    s.bound = *rep.bound;
    s.f_star = rep.f_star;
  }
  const double k = static_cast<double>(replications);
  s.mean_total /= k;
  s.mean_term1 /= k;
  s.mean_term2 /= k;
  s.mean_term3 /= k;
  s.mean_estimation_error /= k;
  return s;
}

}  // namespace vaxalloc
