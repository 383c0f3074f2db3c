#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "vaxalloc/vaxalloc.hpp"

namespace fixture {

using namespace vaxalloc;

struct Case {
  ContactGraph graph;
  Population pop;
  SirParams params;
};

/// Random instance with its own generator, independent of the harness
/// sampling path. Weights vary when `vary_weights` is set.
inline Case random_case(std::size_t n, double density, std::uint64_t seed, SirParams params = SirParams::set1(),
                        bool vary_weights = false) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<UnitId, UnitId>> edges;
  for (UnitId i = 0; i < n; ++i)
    for (UnitId j = i + 1; j < n; ++j)
      if (u(gen) < density) edges.emplace_back(i, j);
  Case c{ContactGraph(n, edges), {}, params};
  for (UnitId i = 0; i < n; ++i) {
    const double x = u(gen);
    c.pop.state.push_back(x < 0.45 ? HealthState::Susceptible
                                   : x < 0.85 ? HealthState::Infected : HealthState::Recovered);
    c.pop.group.push_back(u(gen) < 0.4 ? Group::G1 : Group::G2);
    c.pop.weight.push_back(vary_weights ? 0.5 + u(gen) : 1.0);
  }
  return c;
}

/// Two units joined by one edge: unit 0 susceptible, unit 1 infected, both in
/// G1, beta_11 = 0.7, gamma_1 = 0.1, unit weights.
inline Case two_unit_case() {
  const std::vector<std::pair<UnitId, UnitId>> edges{{0, 1}};
  Case c{ContactGraph(2, edges), {}, SirParams::set1()};
  c.pop.state = {HealthState::Susceptible, HealthState::Infected};
  c.pop.group = {Group::G1, Group::G1};
  c.pop.weight = {1.0, 1.0};
  return c;
}

inline std::vector<std::uint8_t> random_indicator(std::size_t n, std::mt19937_64& gen, double p = 0.5) {
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = coin(gen);
  return v;
}

inline std::vector<UnitId> members_of(const std::vector<std::uint8_t>& v) {
  std::vector<UnitId> out;
  for (UnitId i = 0; i < v.size(); ++i)
    if (v[i]) out.push_back(i);
  return out;
}

}  // namespace fixture
