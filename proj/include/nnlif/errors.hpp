#pragma once

#include <stdexcept>
#include <string>

namespace nnlif {

/// Violated precondition on model, grid or run parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that cannot be turned into a probability density (zero mass, NaN).
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A time step that violates the stability bound it was given.
class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The discrete scheme produced something it must never produce (negative cell).
class SchemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity failed an identity it is supposed to satisfy.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nnlif
