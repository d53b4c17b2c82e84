#pragma once

#include <stdexcept>
#include <string>

namespace carenkf {

// Numerical failures raised by the linear-algebra kernel and the filters.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPsd : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// An ensemble member or truth state left the finite reals (filter divergence).
class NonFiniteState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyMeasurement : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidRho : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace carenkf
