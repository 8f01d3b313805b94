#pragma once

#include <stdexcept>
#include <string>

namespace drpinns {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or precondition violation (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidArchitecture : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InputDimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidDomain : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptyInput : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class OutOfDomain : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NoReference : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DuplicateObservation : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical failure (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A loss term evaluated to NaN or infinity. `term()` names the offending term.
class NonFiniteLoss : public NumericalError {
 public:
  explicit NonFiniteLoss(std::string term);
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

class NonFiniteGradient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteObservation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace drpinns
