#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vaxalloc/allocation.hpp"
#include "vaxalloc/epidemic.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"
#include "vaxalloc/random.hpp"

namespace vaxalloc {

/// Absolute tolerance for every floating-point identity the library asserts.
inline constexpr double kTolerance = 1e-12;

/// One off-diagonal entry w_{row,col} of the interaction matrix.
struct Interaction {
  UnitId row = 0;
  UnitId col = 0;
  double value = 0.0;
};

/// Combined weight w_{x,k} + w_{k,x} between a unit x and another unit k.
struct Coupling {
  UnitId other = 0;
  double weight = 0.0;
};

/// Precomputed pieces of the simplified welfare
///
///   F(V) = v'Wv + C'v - 1'Wv - v'W1,
///
/// with W sparse (nonzero only on susceptible-row / infected-column pairs
/// that share an edge) and asymmetric. Also caches the additive constant
/// separating F from the linear-mode welfare.
class ObjectiveContext {
 public:
  ObjectiveContext() = default;

  /// Assembles a context from raw coefficients. Entries with the same
  /// (row, col) are summed. No sign condition is imposed, so contexts that
  /// are not submodular can be expressed; `has_submodular_form` reports it.
  static ObjectiveContext from_terms(std::size_t n_units, std::vector<double> linear,
                                     std::vector<Interaction> interactions, double welfare_constant = 0.0) {
    if (linear.size() != n_units) throw ParameterError("linear coefficient vector has wrong length");
    ObjectiveContext ctx;
    ctx.n_units_ = n_units;
    ctx.linear_ = std::move(linear);
    ctx.welfare_constant_ = welfare_constant;

    for (const auto& t : interactions) {
      if (t.row >= n_units || t.col >= n_units) throw ParameterError("interaction index out of range");
      if (t.row == t.col) throw ParameterError("interaction matrix must have a zero diagonal");
    }
    std::sort(interactions.begin(), interactions.end(),
              [](const Interaction& a, const Interaction& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    for (const auto& t : interactions) {
      if (!ctx.interactions_.empty() && ctx.interactions_.back().row == t.row && ctx.interactions_.back().col == t.col)
        ctx.interactions_.back().value += t.value;
      else
        ctx.interactions_.push_back(t);
    }

    ctx.row_offsets_.assign(n_units + 1, 0);
    for (const auto& t : ctx.interactions_) ++ctx.row_offsets_[t.row + 1];
    std::partial_sum(ctx.row_offsets_.begin(), ctx.row_offsets_.end(), ctx.row_offsets_.begin());

    std::vector<std::vector<Coupling>> by_unit(n_units);
    for (const auto& t : ctx.interactions_) {
      by_unit[t.row].push_back({t.col, t.value});
      by_unit[t.col].push_back({t.row, t.value});
    }
    ctx.coupling_offsets_.assign(n_units + 1, 0);
    ctx.base_gain_ = ctx.linear_;
    for (UnitId x = 0; x < n_units; ++x) {
      auto& list = by_unit[x];
      std::sort(list.begin(), list.end(), [](const Coupling& a, const Coupling& b) { return a.other < b.other; });
      std::size_t merged_begin = ctx.couplings_.size();
      for (const auto& c : list) {
        if (ctx.couplings_.size() > merged_begin && ctx.couplings_.back().other == c.other)
          ctx.couplings_.back().weight += c.weight;
        else
          ctx.couplings_.push_back(c);
      }
      for (std::size_t k = merged_begin; k < ctx.couplings_.size(); ++k) ctx.base_gain_[x] -= ctx.couplings_[k].weight;
      ctx.coupling_offsets_[x + 1] = ctx.couplings_.size();
    }
    return ctx;
  }

  std::size_t n_units() const noexcept { return n_units_; }
  double welfare_constant() const noexcept { return welfare_constant_; }

  /// Linear coefficient c_i.
  double linear(UnitId i) const { return linear_.at(i); }
  std::span<const double> linear() const noexcept { return linear_; }

  /// All nonzero interaction entries, sorted by (row, col).
  std::span<const Interaction> interactions() const noexcept { return interactions_; }

  std::span<const Interaction> row(UnitId i) const {
    return std::span<const Interaction>(interactions_).subspan(row_offsets_.at(i), row_offsets_[i + 1] - row_offsets_[i]);
  }

  /// w_ij, zero when no entry is stored.
  double interaction(UnitId i, UnitId j) const {
    auto r = row(i);
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Interaction& t, UnitId col) { return t.col < col; });
    return it != r.end() && it->col == j ? it->value : 0.0;
  }

  /// Units k with w_xk + w_kx stored, sorted by k.
  std::span<const Coupling> couplings(UnitId x) const {
    return std::span<const Coupling>(couplings_).subspan(coupling_offsets_.at(x),
                                                         coupling_offsets_[x + 1] - coupling_offsets_[x]);
  }

  /// F({x}) - F(empty) = c_x - sum_k (w_xk + w_kx).
  double base_gain(UnitId x) const { return base_gain_.at(x); }

  /// True when every off-diagonal entry is non-positive, the condition under
  /// which F is submodular.
  bool has_submodular_form() const noexcept {
    return std::all_of(interactions_.begin(), interactions_.end(), [](const Interaction& t) { return t.value <= 0.0; });
  }

 private:
  std::size_t n_units_ = 0;
  std::vector<double> linear_;
  std::vector<Interaction> interactions_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Coupling> couplings_;
  std::vector<std::size_t> coupling_offsets_{0};
  std::vector<double> base_gain_;
  double welfare_constant_ = 0.0;
};

/// Builds the simplified welfare of a network and health state:
///
///   c_i  = g_i [1 - R_i - gamma_{group(i)} I_i - S_i] / N
///   w_ij = -g_i beta_{group(i), group(j)} A_ij S_i I_j / (|N_i| N)
///
/// with |N_i| floored at one.
inline ObjectiveContext build_context(const ContactGraph& graph, const Population& pop, const SirParams& params) {
  const std::size_t n = graph.n_units();
  if (pop.n_units() != n) throw ParameterError("population size does not match the graph");
  pop.validate();
  params.validate();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> linear(n, 0.0);
  std::vector<Interaction> interactions;
  double constant = 0.0;
  for (UnitId i = 0; i < n; ++i) {
    const double g = pop.weight[i];
    const Group own = pop.group[i];
    switch (pop.state[i]) {
      case HealthState::Infected:
        linear[i] = g * (1.0 - params.recovery(own)) * inv_n;
        constant += g * params.recovery(own) * inv_n;
        break;
      case HealthState::Recovered:
        constant += g * inv_n;
        break;
      case HealthState::Susceptible: {
        constant += g * inv_n;
        const double scale = g * inv_n / static_cast<double>(graph.effective_degree(i));
        for (UnitId j : graph.neighbors(i)) {
          if (pop.state[j] != HealthState::Infected) continue;
          const double w = -scale * params.contact_rate(own, pop.group[j]);
          if (w == 0.0) continue;
          interactions.push_back({i, j, w});
          constant += w;
        }
        break;
      }
    }
  }
  return ObjectiveContext::from_terms(n, std::move(linear), std::move(interactions), constant);
}

/// F(V) given both the member list and its indicator vector.
inline double eval_f(const ObjectiveContext& ctx, std::span<const UnitId> members,
                     std::span<const std::uint8_t> indicator) {
  double f = 0.0;
  for (UnitId i : members) {
    f += ctx.base_gain(i);
    for (const auto& t : ctx.row(i))
      if (indicator[t.col]) f += t.value;
  }
  return f;
}

inline double eval_f(const ObjectiveContext& ctx, const Allocation& alloc) {
  if (!alloc.empty() && alloc.units().back() >= ctx.n_units()) throw ParameterError("allocation index out of range");
  return eval_f(ctx, alloc.units(), alloc.indicator(ctx.n_units()));
}

/// Weighted average probability of being healthy (susceptible or recovered)
/// in the second period, computed from per-unit transition probabilities.
inline double eval_welfare(const ContactGraph& graph, const Population& pop, const SirParams& params,
                           const Allocation& alloc, InfectionMode mode = InfectionMode::Linear) {
  const std::size_t n = graph.n_units();
  if (pop.n_units() != n) throw ParameterError("population size does not match the graph");
  const auto v = alloc.indicator(n);
  double total = 0.0;
  for (UnitId i = 0; i < n; ++i)
    total += pop.weight[i] * transition_probabilities(i, graph, pop, params, v, mode).healthy();
  return total / static_cast<double>(n);
}

/// F(V + {x}) - F(V), from the couplings of x alone.
inline double marginal_gain(const ObjectiveContext& ctx, std::span<const std::uint8_t> indicator, UnitId x) {
  double gain = ctx.base_gain(x);
  for (const auto& c : ctx.couplings(x))
    if (indicator[c.other]) gain += c.weight;
  return gain;
}

inline double marginal_gain(const ObjectiveContext& ctx, const Allocation& alloc, UnitId candidate) {
  if (candidate >= ctx.n_units()) throw ParameterError("candidate index out of range");
  if (alloc.contains(candidate)) throw ParameterError("candidate " + std::to_string(candidate) + " is already selected");
  return marginal_gain(ctx, alloc.indicator(ctx.n_units()), candidate);
}

struct SubmodularityViolation {
  enum class Kind { DiminishingReturns, Monotonicity };
  Kind kind = Kind::DiminishingReturns;
  std::vector<UnitId> smaller;  // A
  std::vector<UnitId> larger;   // B, a superset of A
  UnitId candidate = 0;         // x, outside B (diminishing returns only)
  double smaller_value = 0.0;   // gain at A, or F(A)
  double larger_value = 0.0;    // gain at B, or F(B)
};

struct SubmodularityReport {
  bool passed = true;
  std::size_t trials = 0;
  std::optional<SubmodularityViolation> counterexample;
};

/// Samples random chains A ⊆ B and x ∉ B and checks
/// gain_x(A) >= gain_x(B) and F(A) <= F(B), both within kTolerance. Stops at
/// the first violation.
inline SubmodularityReport check_submodular(const ObjectiveContext& ctx, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("trials must be at least 1");
  SubmodularityReport report;
  const std::size_t n = ctx.n_units();
  if (n == 0) return report;
  Rng rng(seed);
  std::vector<UnitId> order(n);
  std::iota(order.begin(), order.end(), UnitId{0});
  std::vector<std::uint8_t> in_a(n), in_b(n);

  for (std::size_t t = 0; t < trials; ++t) {
    ++report.trials;
    for (std::size_t k = n - 1; k > 0; --k) std::swap(order[k], order[uniform_below(rng, k + 1)]);
    // B is a prefix of length b < n, A a prefix of B, x drawn from the rest.
    const std::size_t b = uniform_below(rng, n);
    const std::size_t a = uniform_below(rng, b + 1);
    const UnitId x = order[b + uniform_below(rng, n - b)];
    std::fill(in_a.begin(), in_a.end(), 0);
    std::fill(in_b.begin(), in_b.end(), 0);
    for (std::size_t k = 0; k < b; ++k) {
      in_b[order[k]] = 1;
      if (k < a) in_a[order[k]] = 1;
    }

    std::vector<UnitId> set_a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(a));
    std::vector<UnitId> set_b(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b));
    const double gain_a = marginal_gain(ctx, in_a, x);
    const double gain_b = marginal_gain(ctx, in_b, x);
    const double f_a = eval_f(ctx, set_a, in_a);
    const double f_b = eval_f(ctx, set_b, in_b);

    auto fail = [&](SubmodularityViolation::Kind kind, double lhs, double rhs) {
      std::sort(set_a.begin(), set_a.end());
      std::sort(set_b.begin(), set_b.end());
      report.passed = false;
      report.counterexample = SubmodularityViolation{kind, std::move(set_a), std::move(set_b), x, lhs, rhs};
    };
    if (gain_a < gain_b - kTolerance) {
      fail(SubmodularityViolation::Kind::DiminishingReturns, gain_a, gain_b);
      break;
    }
    if (f_a > f_b + kTolerance) {
      fail(SubmodularityViolation::Kind::Monotonicity, f_a, f_b);
      break;
    }
  }
  return report;
}

}  // namespace vaxalloc
