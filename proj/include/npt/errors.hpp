#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npt {

/// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state construction that cannot be normalized (zero norm).
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// Truncation discards more weight than the configured threshold allows.
class TruncationTooSevere : public Error {
 public:
  TruncationTooSevere(const std::string& what, double discarded)
      : Error(what), discarded_weight(discarded) {}
  double discarded_weight = 0.0;
};

/// Exact backend only: a surd factor sqrt(d) with non-square d survived the
/// final sum; the caller must fall back to floating point.
class IrrationalValue : public Error {
 public:
  using Error::Error;
};

/// A principal-minor subset referenced rows outside the built matrix.
class SubsetOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A combinatorial search hit its budget before finishing.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, std::size_t examined)
      : Error(what), subsets_examined(examined) {}
  std::size_t subsets_examined = 0;
};

/// No operator ordering matching the requested signature was found.
class NoMatchingOrdering : public Error {
 public:
  NoMatchingOrdering(const std::string& what, std::size_t evals)
      : Error(what), determinants_evaluated(evals) {}
  std::size_t determinants_evaluated = 0;
};

/// Malformed state file or report input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace npt
