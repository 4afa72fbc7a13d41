#pragma once

#include <stdexcept>
#include <string>

namespace nnfir {

// Two families, mirrored by the CLI exit codes: malformed input/configuration
// (exit 1) and data that violates a mathematical precondition (exit 2).

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not agree.
class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// Invalid solver or experiment configuration.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// Quantity evaluated outside the effective domain (F(h) = +inf).
class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Data that make the problem degenerate (Y == 0 where S is needed, U_{0.} == 0, ...).
class DegenerateDataError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Some positive output precedes every positive input of its experiment.
class WellPosednessError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class InitializationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class SingularSystemError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Instance exceeds what an exhaustive oracle is allowed to handle.
class SizeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace nnfir
