#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"

namespace vaxalloc {

/// Flat `key = value` text: one pair per line, `#` starts a comment line.
/// Keeps the line of each key for error messages.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in) {
    KeyValueFile kv;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = detail::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) detail::parse_fail("expected key = value", line_no);
      std::string key = detail::trim(line.substr(0, eq));
      if (key.empty()) detail::parse_fail("empty key", line_no);
      if (kv.entries_.count(key)) detail::parse_fail("duplicate key '" + key + "'", line_no);
      kv.entries_[key] = {detail::trim(line.substr(eq + 1)), line_no};
    }
    return kv;
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(key + ": " + what);
    detail::parse_fail(key + ": " + what, it->second.line);
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, raw(key)) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? to_u64(key, raw(key)) : fallback;
  }

  std::string get_string(const std::string& key, std::string fallback) const {
    return has(key) ? raw(key) : std::move(fallback);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected a boolean, got '" + v + "'");
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) fail(key, "empty list element");
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : get_list(key)) out.push_back(to_double(key, item));
    return out;
  }

  std::vector<std::uint64_t> get_u64s(const std::string& key, std::vector<std::uint64_t> fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : get_list(key)) out.push_back(to_u64(key, item));
    return out;
  }

  double to_double(const std::string& key, const std::string& text) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + text + "'");
    }
    if (used != text.size()) fail(key, "expected a number, got '" + text + "'");
    return v;
  }

  std::uint64_t to_u64(const std::string& key, const std::string& text) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      fail(key, "expected a non-negative integer, got '" + text + "'");
    return v;
  }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace vaxalloc
