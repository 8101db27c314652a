#pragma once

#include <stdexcept>
#include <string>

namespace haarcode {

/// Argument outside the mathematical domain of an operation (w > N, alpha < 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Vector or matrix dimensions inconsistent with the declared tensor structure.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds the configured dense-matrix or memory budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a numerical precondition (e.g. non-Hermitian matrix).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Root bracketing or eigensolver failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Postselection outcome with vanishing probability.
class DegeneratePostselection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Postselected states built with different protocol parameters.
class ProtocolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace haarcode
