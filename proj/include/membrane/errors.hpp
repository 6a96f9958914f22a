#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

/// Argument outside the mathematical domain of an operation (site outside V_N, bad axis, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A caller broke an operation's contract (wrong event kind, unmet precondition).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal invariant failed; indicates a bug rather than bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace membrane
