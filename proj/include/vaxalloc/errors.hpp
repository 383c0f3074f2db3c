#pragma once

#include <stdexcept>
#include <string>

namespace vaxalloc {

/// A numeric argument lies outside the domain an operation accepts.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input (edge lists, config and population files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search refused because the candidate count exceeds the budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vaxalloc
