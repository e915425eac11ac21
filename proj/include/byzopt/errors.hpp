#pragma once

#include <stdexcept>
#include <string>

namespace byzopt {

/// Non-finite input to a function evaluation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller passed an argument outside an operation's contract.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scenario or report file could not be turned into a valid configuration.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Resilience, UnknownAdversary, Other };

  ConfigError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A property that the algorithms guarantee for valid inputs did not hold.
/// Reaching one of these means a bug (or a broken precondition upstream).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace byzopt
