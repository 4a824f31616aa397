#pragma once

#include <stdexcept>
#include <string>

namespace cptq {

/// Argument outside the mathematical domain of an operation (x < 0, p outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inversion requested at or above the saturation level u(+inf).
class SaturationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid model parameters or malformed tables.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce the requested object.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The non-attainability construction failed (no admissible level, b_n <= 2 x0, ...).
class ConstructionError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

/// The budget set is empty or the payoff is not admissible.
class InfeasibleError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace cptq
