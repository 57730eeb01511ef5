#pragma once

#include <stdexcept>
#include <string>

namespace cflab {

/// Raised when elements or sets from different groups are mixed.
struct KindMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation would need scheme data beyond the stored depth.
struct DepthExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a partial-action image is still undefined at the level budget.
struct UndefinedAtBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a bounded search (builder growth, witness search) gives up.
struct SearchExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a torsion test is applied to an infinite-order element or
/// vice versa.
struct WrongDichotomyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a counting request is not covered by the sample's region.
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised on malformed input files; `where` names the offending field.
struct ParseError : std::runtime_error {
  std::string where;
  ParseError(const std::string& where_, const std::string& what_)
      : std::runtime_error(where_ + ": " + what_), where(where_) {}
};

}  // namespace cflab
