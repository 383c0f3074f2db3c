#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vaxalloc/errors.hpp"
#include "vaxalloc/random.hpp"

namespace vaxalloc {

using UnitId = std::size_t;

/// Undirected contact network without self-loops, stored as sorted neighbor
/// lists. Immutable once built.
class ContactGraph {
 public:
  ContactGraph() = default;

  /// Builds from an arbitrary pair list. Pairs are symmetrized and duplicates
  /// collapse; throws ParameterError on self-loops or out-of-range indices.
  ContactGraph(std::size_t n_units, std::span<const std::pair<UnitId, UnitId>> edges)
      : adjacency_(n_units) {
    for (auto [i, j] : edges) {
      if (i >= n_units || j >= n_units) throw ParameterError("edge index out of range");
      if (i == j) throw ParameterError("self-loop on unit " + std::to_string(i));
      adjacency_[i].push_back(j);
      adjacency_[j].push_back(i);
    }
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      edge_count_ += list.size();
    }
    edge_count_ /= 2;
  }

  std::size_t n_units() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t degree(UnitId i) const { return adjacency_.at(i).size(); }
  std::span<const UnitId> neighbors(UnitId i) const { return adjacency_.at(i); }

  /// Degree used as a denominator: isolated units count as having one neighbor.
  std::size_t effective_degree(UnitId i) const { return std::max<std::size_t>(1, degree(i)); }

  std::size_t max_degree() const noexcept {
    std::size_t best = 0;
    for (const auto& list : adjacency_) best = std::max(best, list.size());
    return best;
  }

  bool has_edge(UnitId i, UnitId j) const {
    const auto& list = adjacency_.at(i);
    return std::binary_search(list.begin(), list.end(), j);
  }

  /// Every undirected edge once, as (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<UnitId, UnitId>> edges() const {
    std::vector<std::pair<UnitId, UnitId>> out;
    out.reserve(edge_count_);
    for (UnitId i = 0; i < adjacency_.size(); ++i)
      for (UnitId j : adjacency_[i])
        if (i < j) out.emplace_back(i, j);
    return out;
  }

  friend bool operator==(const ContactGraph&, const ContactGraph&) = default;

 private:
  std::vector<std::vector<UnitId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// G(n, p) random graph. Pairs (i, j), i < j, are visited in lexicographic
/// order and each becomes an edge when uniform01(rng) < density, with rng an
/// mt19937_64 seeded with `seed`.
inline ContactGraph erdos_renyi(std::size_t n_units, double density, std::uint64_t seed) {
  if (n_units < 1) throw ParameterError("n_units must be at least 1");
  if (!(density >= 0.0 && density <= 1.0))
    throw ParameterError("density must lie in [0, 1], got " + std::to_string(density));
  Rng rng(seed);
  std::vector<std::pair<UnitId, UnitId>> edges;
  for (UnitId i = 0; i < n_units; ++i)
    for (UnitId j = i + 1; j < n_units; ++j)
      if (uniform01(rng) < density) edges.emplace_back(i, j);
  return ContactGraph(n_units, edges);
}

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] inline void parse_fail(const std::string& what, std::size_t line) {
  throw ParseError(what + " at line " + std::to_string(line));
}

}  // namespace detail

/// Reads the edge-list format: a `n_units=N` header, then one `i j` pair per
/// line. Blank lines and lines starting with `#` are skipped.
inline ContactGraph load_edge_list(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t n_units = 0;
  bool have_header = false;
  std::vector<std::pair<UnitId, UnitId>> edges;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      constexpr std::string_view key = "n_units=";
      if (line.rfind(key, 0) != 0) detail::parse_fail("missing n_units header", line_no);
      std::istringstream value(line.substr(key.size()));
      long long n = -1;
      std::string rest;
      if (!(value >> n) || (value >> rest) || n < 1) detail::parse_fail("malformed n_units header", line_no);
      n_units = static_cast<std::size_t>(n);
      have_header = true;
      continue;
    }
    std::istringstream fields(line);
    long long i = -1, j = -1;
    std::string rest;
    if (!(fields >> i >> j) || (fields >> rest)) detail::parse_fail("malformed edge line", line_no);
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_units || static_cast<std::size_t>(j) >= n_units)
      detail::parse_fail("index out of range", line_no);
    if (i == j) detail::parse_fail("self-loop", line_no);
    edges.emplace_back(static_cast<UnitId>(i), static_cast<UnitId>(j));
  }
  if (!have_header) detail::parse_fail("missing n_units header", line_no + 1);
  return ContactGraph(n_units, edges);
}

inline void save_edge_list(const ContactGraph& graph, std::ostream& out) {
  out << "n_units=" << graph.n_units() << '\n';
  for (auto [i, j] : graph.edges()) out << i << ' ' << j << '\n';
  if (!out) throw std::runtime_error("failed writing edge list");
}

}  // namespace vaxalloc
