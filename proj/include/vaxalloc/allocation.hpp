#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vaxalloc/graph.hpp"

namespace vaxalloc {

/// Two covariate groups: G1 (young) and G2 (old).
enum class Group : std::uint8_t { G1 = 0, G2 = 1 };

constexpr std::size_t index(Group g) noexcept { return static_cast<std::size_t>(g); }

/// Per-group dose caps of the targeting (partition matroid) constraint.
struct TargetingCaps {
  std::size_t group1 = 0;
  std::size_t group2 = 0;
};

/// A vaccinated set V together with the constraint it was produced under.
class Allocation {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  Allocation() = default;

  explicit Allocation(std::vector<UnitId> selected, std::size_t capacity = kUnbounded,
                      std::optional<TargetingCaps> targeting = std::nullopt)
      : selected_(std::move(selected)), capacity_(capacity), targeting_(targeting) {
    std::sort(selected_.begin(), selected_.end());
    selected_.erase(std::unique(selected_.begin(), selected_.end()), selected_.end());
  }

  std::span<const UnitId> units() const noexcept { return selected_; }
  std::size_t size() const noexcept { return selected_.size(); }
  bool empty() const noexcept { return selected_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const std::optional<TargetingCaps>& targeting() const noexcept { return targeting_; }

  bool contains(UnitId i) const { return std::binary_search(selected_.begin(), selected_.end(), i); }

  /// Binary vector v of length n_units.
  std::vector<std::uint8_t> indicator(std::size_t n_units) const {
    std::vector<std::uint8_t> v(n_units, 0);
    for (UnitId i : selected_) v.at(i) = 1;
    return v;
  }

  /// Whether |V| <= d and, when targeting caps are set, the per-group caps hold.
  bool feasible(std::span<const Group> groups) const {
    if (selected_.size() > capacity_) return false;
    if (!targeting_) return true;
    std::size_t in_g1 = 0, in_g2 = 0;
    for (UnitId i : selected_) (groups[i] == Group::G1 ? in_g1 : in_g2)++;
    return in_g1 <= targeting_->group1 && in_g2 <= targeting_->group2;
  }

  friend bool operator==(const Allocation& a, const Allocation& b) { return a.selected_ == b.selected_; }

 private:
  std::vector<UnitId> selected_;
  std::size_t capacity_ = kUnbounded;
  std::optional<TargetingCaps> targeting_;
};

}  // namespace vaxalloc
