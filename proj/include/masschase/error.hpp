#pragma once

#include <stdexcept>
#include <string>

namespace masschase {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on caller-supplied arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical machinery itself (the CLI maps these to exit 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ZeroMass : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NotReduced : public Error {
 public:
  using Error::Error;
};

class TooDeep : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TubeOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CflViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveJacobian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BoxOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace masschase
