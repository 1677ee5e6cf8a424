#pragma once

#include <stdexcept>
#include <string>

namespace lndm {

/// Base of every error raised by the library. The CLI maps `UserError`
/// subclasses to exit code 1 and `NumericalError` subclasses to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UserError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public UserError {
 public:
  using UserError::UserError;
};

class DimensionError : public UserError {
 public:
  using UserError::UserError;
};

class IndexError : public UserError {
 public:
  using UserError::UserError;
};

class InsufficientDataError : public UserError {
 public:
  using UserError::UserError;
};

/// Malformed files, missing columns, bad configuration values.
class InputError : public UserError {
 public:
  using UserError::UserError;
};

class IdentifiabilityError : public UserError {
 public:
  using UserError::UserError;
};

/// Symmetric factorization failed even after jitter.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OptimizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lndm
