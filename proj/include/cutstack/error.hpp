#pragma once

#include <stdexcept>
#include <string>

namespace cutstack {

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured budget (stages, suffix cap, steps, random bits) ran out.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// emit_symbols needs a deeper stage than the process was built with.
class InsufficientStages : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

// Input to the K-recovery decoder cannot come from any valid k-sequence.
class InconsistentInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cutstack
