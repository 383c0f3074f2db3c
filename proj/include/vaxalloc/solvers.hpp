#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vaxalloc/allocation.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/objective.hpp"
#include "vaxalloc/random.hpp"

namespace vaxalloc {

/// Largest number of candidate sets brute_force will evaluate.
inline constexpr double kDefaultBruteForceBudget = 1e8;

struct GainStep {
  UnitId unit = 0;
  double gain = 0.0;
};

struct SolverResult {
  Allocation allocation;
  double f_value = 0.0;   // F at the allocation, from a full evaluation
  double welfare = 0.0;   // linear-mode welfare, F plus the context constant
  std::size_t rounds = 0;
  std::vector<GainStep> gain_trace;  // greedy solvers only
};

namespace detail {

inline SolverResult finish(const ObjectiveContext& ctx, Allocation alloc, std::size_t rounds,
                           std::vector<GainStep> trace = {}) {
  SolverResult r;
  r.f_value = eval_f(ctx, alloc);
  r.welfare = r.f_value + ctx.welfare_constant();
  r.allocation = std::move(alloc);
  r.rounds = rounds;
  r.gain_trace = std::move(trace);
  return r;
}

/// Index of the largest gain among eligible units. A later unit replaces the
/// incumbent only if it is better by more than kTolerance, so near-ties go to
/// the lowest index. Returns n when nothing is eligible.
template <typename Eligible>
std::size_t best_candidate(std::span<const double> gains, Eligible&& eligible) {
  std::size_t best = gains.size();
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!eligible(i)) continue;
    if (best == gains.size() || gains[i] > gains[best] + kTolerance) best = i;
  }
  return best;
}

/// Adds x to the running selection and updates every affected gain.
inline void select(const ObjectiveContext& ctx, UnitId x, std::vector<double>& gains,
                   std::vector<std::uint8_t>& chosen) {
  chosen[x] = 1;
  for (const auto& c : ctx.couplings(x)) gains[c.other] += c.weight;
}

inline void check_groups(const ObjectiveContext& ctx, std::span<const Group> groups) {
  if (groups.size() != ctx.n_units()) throw ParameterError("group labels do not match the number of units");
}

}  // namespace detail

/// Greedy maximization under |V| <= d. Each round adds the unit with the
/// largest marginal gain; gains are maintained incrementally, so a run costs
/// O(N d) plus the couplings of the selected units. Fills to min(d, N) even
/// when the best remaining gain is zero.
inline SolverResult greedy_capacity(const ObjectiveContext& ctx, std::size_t d) {
  if (d < 1) throw ParameterError("capacity must be at least 1");
  const std::size_t n = ctx.n_units();
  const std::size_t target = std::min(d, n);
  std::vector<double> gains(n);
  for (UnitId i = 0; i < n; ++i) gains[i] = ctx.base_gain(i);
  std::vector<std::uint8_t> chosen(n, 0);
  std::vector<UnitId> selected;
  std::vector<GainStep> trace;
  selected.reserve(target);
  trace.reserve(target);

  while (selected.size() < target) {
    const std::size_t x = detail::best_candidate(gains, [&](std::size_t i) { return !chosen[i]; });
    trace.push_back({x, gains[x]});
    selected.push_back(x);
    detail::select(ctx, x, gains, chosen);
  }
  const std::size_t rounds = selected.size();
  return detail::finish(ctx, Allocation(std::move(selected), d), rounds, std::move(trace));
}

/// Greedy maximization under |V| <= d, |V ∩ G1| <= caps.group1 and
/// |V ∩ G2| <= caps.group2. Each round takes the highest-gain candidate whose
/// addition keeps its group within cap. Walking the gain-sorted list until a
/// feasible unit appears picks the same unit, since feasibility depends only on
/// the unit's group. Stops early when no candidate is feasible.
inline SolverResult greedy_targeting(const ObjectiveContext& ctx, std::size_t d, TargetingCaps caps,
                                     std::span<const Group> groups) {
  detail::check_groups(ctx, groups);
  const std::size_t n = ctx.n_units();
  std::vector<double> gains(n);
  for (UnitId i = 0; i < n; ++i) gains[i] = ctx.base_gain(i);
  std::vector<std::uint8_t> chosen(n, 0);
  std::size_t used[2] = {0, 0};
  const std::size_t limit[2] = {caps.group1, caps.group2};
  std::vector<UnitId> selected;
  std::vector<GainStep> trace;

  while (selected.size() < d) {
    const std::size_t x = detail::best_candidate(gains, [&](std::size_t i) {
      return !chosen[i] && used[index(groups[i])] < limit[index(groups[i])];
    });
    if (x == n) break;
    ++used[index(groups[x])];
    trace.push_back({x, gains[x]});
    selected.push_back(x);
    detail::select(ctx, x, gains, chosen);
  }
  const std::size_t rounds = selected.size();
  return detail::finish(ctx, Allocation(std::move(selected), d, caps), rounds, std::move(trace));
}

/// C(n, k) as a double; exact while it fits in 53 bits.
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Exact maximizer of F over |V| <= d. F is non-decreasing, so only sets of
/// size min(d, N) are enumerated, in lexicographic order; the first maximizer
/// is kept. Refuses with BudgetError when C(N, d) exceeds `budget`.
inline SolverResult brute_force(const ObjectiveContext& ctx, std::size_t d, double budget = kDefaultBruteForceBudget) {
  const std::size_t n = ctx.n_units();
  const std::size_t k = std::min(d, n);
  const double count = binomial(n, k);
  if (count > budget) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", count);
    throw BudgetError("brute force refused: C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " + buf +
                      " exceeds the budget");
  }

  std::vector<UnitId> combo(k);
  std::iota(combo.begin(), combo.end(), UnitId{0});
  std::vector<std::uint8_t> indicator(n, 0);
  for (UnitId i : combo) indicator[i] = 1;
  std::vector<UnitId> best = combo;
  double best_f = eval_f(ctx, combo, indicator);
  std::size_t evaluated = 1;

  while (k > 0) {
    // Advance to the next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && combo[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    --pos;
    for (std::size_t p = pos; p < k; ++p) indicator[combo[p]] = 0;
    ++combo[pos];
    for (std::size_t p = pos + 1; p < k; ++p) combo[p] = combo[p - 1] + 1;
    for (std::size_t p = pos; p < k; ++p) indicator[combo[p]] = 1;

    const double f = eval_f(ctx, combo, indicator);
    ++evaluated;
    if (f > best_f) {
      best_f = f;
      best = combo;
    }
  }
  return detail::finish(ctx, Allocation(std::move(best), d), evaluated);
}

/// Draws uniformly random size-d subsets of {0, ..., n-1} by a partial
/// Fisher-Yates shuffle of a persistent permutation.
class RandomSubsetSampler {
 public:
  RandomSubsetSampler(std::size_t n_units, std::size_t d) : order_(n_units), size_(std::min(d, n_units)) {
    std::iota(order_.begin(), order_.end(), UnitId{0});
  }

  std::span<const UnitId> draw(Rng& rng) {
    const std::size_t n = order_.size();
    for (std::size_t k = 0; k < size_; ++k) std::swap(order_[k], order_[k + uniform_below(rng, n - k)]);
    return std::span<const UnitId>(order_).first(size_);
  }

 private:
  std::vector<UnitId> order_;
  std::size_t size_;
};

struct RandomAssignmentResult {
  std::size_t draws = 0;
  double mean_f = 0.0;
  double sd_f = 0.0;
  double mean_welfare = 0.0;
  double sd_welfare = 0.0;
  double mean_group1_share = 0.0;  // average fraction of drawn units in G1; 0 without labels
};

/// Averages F and welfare over `draws` uniformly random size-d allocations.
/// Standard deviations use the n-1 denominator. `groups` is optional.
inline RandomAssignmentResult random_assignment(const ObjectiveContext& ctx, std::size_t d, std::size_t draws,
                                                std::uint64_t seed, std::span<const Group> groups = {}) {
  if (draws < 1) throw ParameterError("draws must be at least 1");
  if (!groups.empty()) detail::check_groups(ctx, groups);
  const std::size_t n = ctx.n_units();
  Rng rng(seed);
  RandomSubsetSampler sampler(n, d);
  std::vector<std::uint8_t> indicator(n, 0);

  // Welford accumulation for mean and variance.
  double mean = 0.0, m2 = 0.0, share_sum = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    auto members = sampler.draw(rng);
    for (UnitId i : members) indicator[i] = 1;
    const double f = eval_f(ctx, members, indicator);
    for (UnitId i : members) indicator[i] = 0;
    const double delta = f - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (f - mean);
    if (!groups.empty() && !members.empty()) {
      std::size_t young = 0;
      for (UnitId i : members) young += (groups[i] == Group::G1);
      share_sum += static_cast<double>(young) / static_cast<double>(members.size());
    }
  }
  RandomAssignmentResult r;
  r.draws = draws;
  r.mean_f = mean;
  r.sd_f = draws > 1 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(draws - 1))) : 0.0;
  r.mean_welfare = mean + ctx.welfare_constant();
  r.sd_welfare = r.sd_f;
  r.mean_group1_share = share_sum / static_cast<double>(draws);
  return r;
}

/// Targeting without network information: vaccinate the priority group in
/// ascending index order, then spill over to the other group in ascending
/// index order once the priority group is exhausted.
inline SolverResult twni(const ObjectiveContext& ctx, std::size_t d, std::span<const Group> groups,
                         Group priority = Group::G2) {
  detail::check_groups(ctx, groups);
  std::vector<UnitId> selected;
  for (int pass = 0; pass < 2 && selected.size() < d; ++pass) {
    for (UnitId i = 0; i < groups.size() && selected.size() < d; ++i)
      if ((groups[i] == priority) == (pass == 0)) selected.push_back(i);
  }
  const std::size_t rounds = selected.size();
  return detail::finish(ctx, Allocation(std::move(selected), d), rounds);
}

}  // namespace vaxalloc
