#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vaxalloc/allocation.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"

namespace vaxalloc {

enum class HealthState : std::uint8_t { Susceptible, Infected, Recovered };

/// How the one-period infection probability is computed from the exposure z.
/// Linear uses q = z and is what the objective is built on; Exact uses
/// q = 1 - exp(-z) and is for welfare diagnostics.
enum class InfectionMode { Linear, Exact };

/// Group-level SIR rates. beta[s][k] is the effective contact rate at which
/// an infected group-k neighbor infects a susceptible group-s unit.
struct SirParams {
  std::array<std::array<double, 2>, 2> beta{};
  std::array<double, 2> gamma{};
  std::array<double, 2> delta{};

  double contact_rate(Group susceptible, Group infected) const noexcept {
    return beta[index(susceptible)][index(infected)];
  }
  double recovery(Group g) const noexcept { return gamma[index(g)]; }
  double mortality(Group g) const noexcept { return delta[index(g)]; }

  /// Throws ParameterError unless every rate lies in [0, 1] and
  /// gamma_s + delta_s <= 1 for both groups.
  void validate() const {
    auto check = [](double x, const char* name) {
      if (!(x >= 0.0 && x <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
    };
    for (const auto& row : beta)
      for (double b : row) check(b, "beta");
    for (std::size_t s = 0; s < 2; ++s) {
      check(gamma[s], "gamma");
      check(delta[s], "delta");
      if (gamma[s] + delta[s] > 1.0) throw ParameterError("gamma + delta must not exceed 1");
    }
  }

  friend bool operator==(const SirParams&, const SirParams&) = default;

  // The two simulation parameter sets. Mortality is not part of them and
  // defaults to zero.
  static SirParams set1() { return {{{{0.7, 0.5}, {0.5, 0.6}}}, {0.1, 0.05}, {0.0, 0.0}}; }
  static SirParams set2() { return {{{{0.8, 0.5}, {0.7, 0.7}}}, {0.1, 0.025}, {0.0, 0.0}}; }
};

/// First-period health states, covariate groups and welfare weights.
struct Population {
  std::vector<HealthState> state;
  std::vector<Group> group;
  std::vector<double> weight;

  std::size_t n_units() const noexcept { return state.size(); }

  bool is(UnitId i, HealthState h) const { return state[i] == h; }

  std::size_t count(HealthState h) const {
    std::size_t c = 0;
    for (auto s : state) c += (s == h);
    return c;
  }

  double max_weight() const {
    double g = 0.0;
    for (double w : weight) g = std::max(g, w);
    return g;
  }

  void validate() const {
    if (group.size() != state.size() || weight.size() != state.size())
      throw ParameterError("population vectors must have equal length");
    for (double w : weight)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights must be finite and non-negative");
  }
};

/// beta = -kappa * ln(1 - c) for kappa contacts per period and per-contact
/// transmission probability c.
inline double beta_from_contacts(double kappa, double transmission) {
  if (!(kappa >= 0.0)) throw ParameterError("contact count must be non-negative");
  if (!(transmission >= 0.0 && transmission < 1.0))
    throw ParameterError("per-contact transmission probability must lie in [0, 1)");
  if (kappa == 0.0) return 0.0;
  return -kappa * std::log1p(-transmission);
}

/// beta = R0 * gamma, from the group-pair reproductive ratio.
inline double beta_from_r0(double r0, double gamma) {
  if (!(r0 >= 0.0)) throw ParameterError("R0 must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("recovery rate must lie in (0, 1]");
  return r0 * gamma;
}

/// Exposure z of `unit`: the contact-rate-weighted fraction of its neighbors
/// that are infected and unvaccinated. `vaccinated` is the indicator vector v.
inline double exposure(UnitId unit, const ContactGraph& graph, const Population& pop, const SirParams& params,
                       std::span<const std::uint8_t> vaccinated) {
  double z = 0.0;
  const Group own = pop.group[unit];
  for (UnitId j : graph.neighbors(unit))
    if (pop.state[j] == HealthState::Infected && !vaccinated[j]) z += params.contact_rate(own, pop.group[j]);
  return z / static_cast<double>(graph.effective_degree(unit));
}

inline double infection_rate(UnitId unit, const ContactGraph& graph, const Population& pop, const SirParams& params,
                             std::span<const std::uint8_t> vaccinated, InfectionMode mode = InfectionMode::Linear) {
  const double z = exposure(unit, graph, pop, params, vaccinated);
  return mode == InfectionMode::Linear ? z : -std::expm1(-z);
}

inline double infection_rate(UnitId unit, const ContactGraph& graph, const Population& pop, const SirParams& params,
                             const Allocation& alloc, InfectionMode mode = InfectionMode::Linear) {
  if (unit >= graph.n_units()) throw ParameterError("unit index out of range");
  return infection_rate(unit, graph, pop, params, alloc.indicator(graph.n_units()), mode);
}

/// Second-period state distribution of one unit.
struct TransitionProbabilities {
  double susceptible = 0.0;
  double infected = 0.0;
  double recovered = 0.0;
  double dead = 0.0;

  double healthy() const noexcept { return susceptible + recovered; }
  double total() const noexcept { return susceptible + infected + recovered + dead; }
};

/// Vaccination moves a unit to Recovered with certainty. Otherwise a
/// susceptible unit is infected with probability q, an infected unit
/// recovers with gamma, dies with delta and stays infected otherwise, and a
/// recovered unit stays recovered.
inline TransitionProbabilities transition_probabilities(UnitId unit, const ContactGraph& graph, const Population& pop,
                                                        const SirParams& params,
                                                        std::span<const std::uint8_t> vaccinated,
                                                        InfectionMode mode = InfectionMode::Linear) {
  if (vaccinated[unit]) return {0.0, 0.0, 1.0, 0.0};
  const Group g = pop.group[unit];
  switch (pop.state[unit]) {
    case HealthState::Susceptible: {
      const double q = infection_rate(unit, graph, pop, params, vaccinated, mode);
      return {1.0 - q, q, 0.0, 0.0};
    }
    case HealthState::Infected: {
      const double recover = params.recovery(g);
      const double die = params.mortality(g);
      return {0.0, 1.0 - recover - die, recover, die};
    }
    case HealthState::Recovered:
      break;
  }
  return {0.0, 0.0, 1.0, 0.0};
}

inline TransitionProbabilities transition_probabilities(UnitId unit, const ContactGraph& graph, const Population& pop,
                                                        const SirParams& params, const Allocation& alloc,
                                                        InfectionMode mode = InfectionMode::Linear) {
  if (unit >= graph.n_units()) throw ParameterError("unit index out of range");
  return transition_probabilities(unit, graph, pop, params, alloc.indicator(graph.n_units()), mode);
}

}  // namespace vaxalloc
