#pragma once

// Reference implementations used only by the tests. They work from dense
// matrices and exhaustive bitmask enumeration and share no code with the
// library beyond the input types.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "vaxalloc/vaxalloc.hpp"

namespace oracle {

using vaxalloc::ContactGraph;
using vaxalloc::Group;
using vaxalloc::HealthState;
using vaxalloc::InfectionMode;
using vaxalloc::Population;
using vaxalloc::SirParams;

using Matrix = std::vector<std::vector<double>>;
using Indicator = std::vector<std::uint8_t>;

struct Dense {
  Matrix w;               // w[i][j]
  std::vector<double> c;  // c[i]
};

inline double beta(const SirParams& p, Group s, Group k) {
  return p.beta[s == Group::G1 ? 0 : 1][k == Group::G1 ? 0 : 1];
}

inline double gamma(const SirParams& p, Group s) { return p.gamma[s == Group::G1 ? 0 : 1]; }

inline double ind(bool b) { return b ? 1.0 : 0.0; }

inline Dense dense(const ContactGraph& g, const Population& pop, const SirParams& p) {
  const std::size_t n = g.n_units();
  const double big_n = static_cast<double>(n);
  Dense d{Matrix(n, std::vector<double>(n, 0.0)), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double s_i = ind(pop.state[i] == HealthState::Susceptible);
    const double i_i = ind(pop.state[i] == HealthState::Infected);
    const double r_i = ind(pop.state[i] == HealthState::Recovered);
    const double g_i = pop.weight[i];
    d.c[i] = g_i * (1.0 - r_i - gamma(p, pop.group[i]) * i_i - s_i) / big_n;
    const double deg = std::max<double>(1.0, static_cast<double>(g.degree(i)));
    for (std::size_t j = 0; j < n; ++j) {
      const double a_ij = ind(g.has_edge(i, j));
      const double i_j = ind(pop.state[j] == HealthState::Infected);
      d.w[i][j] = -(a_ij * g_i / (deg * big_n)) * beta(p, pop.group[i], pop.group[j]) * s_i * i_j;
    }
  }
  return d;
}

/// v'Wv + C'v - 1'Wv - v'W1.
inline double f_matrix(const Dense& d, const Indicator& v) {
  const std::size_t n = d.c.size();
  double vwv = 0.0, cv = 0.0, one_wv = 0.0, vw_one = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cv += d.c[i] * v[i];
    for (std::size_t j = 0; j < n; ++j) {
      vwv += v[i] * d.w[i][j] * v[j];
      one_wv += d.w[i][j] * v[j];
      vw_one += v[i] * d.w[i][j];
    }
  }
  return vwv + cv - one_wv - vw_one;
}

/// Pairwise form: sum_i c_i v_i + sum_ij T_ij (v_i + v_j - v_i v_j) / (|N_i| N)
/// with T_ij = A_ij S_i I_j g_i beta.
inline double f_pairwise(const ContactGraph& g, const Population& pop, const SirParams& p, const Indicator& v) {
  const std::size_t n = g.n_units();
  const double big_n = static_cast<double>(n);
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool infected = pop.state[i] == HealthState::Infected;
    f += pop.weight[i] * ind(infected) * (1.0 - gamma(p, pop.group[i])) / big_n * v[i];
    if (pop.state[i] != HealthState::Susceptible) continue;
    const double deg = std::max<double>(1.0, static_cast<double>(g.degree(i)));
    for (std::size_t j : g.neighbors(i)) {
      if (pop.state[j] != HealthState::Infected) continue;
      const double t = pop.weight[i] * beta(p, pop.group[i], pop.group[j]);
      f += t * (v[i] + v[j] - v[i] * v[j]) / (deg * big_n);
    }
  }
  return f;
}

/// Probability of being healthy, averaged with weights, straight from the
/// per-unit formula g_i [v_i + (R_i + gamma I_i)(1 - v_i) + (1 - q_i) S_i (1 - v_i)].
inline double welfare(const ContactGraph& g, const Population& pop, const SirParams& p, const Indicator& v,
                      InfectionMode mode) {
  const std::size_t n = g.n_units();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j : g.neighbors(i))
      if (pop.state[j] == HealthState::Infected && !v[j]) z += beta(p, pop.group[i], pop.group[j]);
    z /= std::max<double>(1.0, static_cast<double>(g.degree(i)));
    const double q = mode == InfectionMode::Linear ? z : 1.0 - std::exp(-z);
    const double s_i = ind(pop.state[i] == HealthState::Susceptible);
    const double i_i = ind(pop.state[i] == HealthState::Infected);
    const double r_i = ind(pop.state[i] == HealthState::Recovered);
    total += pop.weight[i] *
             (v[i] + (r_i + gamma(p, pop.group[i]) * i_i) * (1 - v[i]) + (1 - q) * s_i * (1 - v[i]));
  }
  return total / static_cast<double>(n);
}

inline Indicator from_mask(std::uint32_t mask, std::size_t n) {
  Indicator v(n, 0);
  for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1u;
  return v;
}

using SetFunction = std::function<double(const Indicator&)>;

/// max F(V) over |V| <= d by enumerating every subset (n <= 24).
inline double max_capacity(const SetFunction& f, std::size_t n, std::size_t d) {
  double best = f(Indicator(n, 0));
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
    if (static_cast<std::size_t>(std::popcount(mask)) <= d) best = std::max(best, f(from_mask(mask, n)));
  return best;
}

/// max F(V) over |V| <= d, |V ∩ G1| <= d1, |V ∩ G2| <= d2.
inline double max_partition(const SetFunction& f, const std::vector<Group>& groups, std::size_t d, std::size_t d1,
                            std::size_t d2) {
  const std::size_t n = groups.size();
  std::uint32_t g1_mask = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (groups[i] == Group::G1) g1_mask |= 1u << i;
  double best = f(Indicator(n, 0));
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto in1 = static_cast<std::size_t>(std::popcount(mask & g1_mask));
    const auto in2 = static_cast<std::size_t>(std::popcount(mask & ~g1_mask));
    if (in1 + in2 <= d && in1 <= d1 && in2 <= d2) best = std::max(best, f(from_mask(mask, n)));
  }
  return best;
}

/// Mean and population variance of F over every subset of size exactly d.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments subset_moments(const SetFunction& f, std::size_t n, std::size_t d) {
  double sum = 0.0, sum_sq = 0.0, count = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != d) continue;
    const double x = f(from_mask(mask, n));
    sum += x;
    sum_sq += x * x;
    count += 1.0;
  }
  const double mean = sum / count;
  return {mean, std::max(0.0, sum_sq / count - mean * mean)};
}

}  // namespace oracle
