#pragma once

#include <stdexcept>
#include <string>

namespace sdelap {

// Base of every error the library throws. Subclasses mark the failure class so
// the CLI can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// re(s) <= mu: the Laplace integral of the mean path diverges.
class ConvergenceDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

// mu - sigma^2/2 <= 0: the variance bound has no finite value.
class BoundInapplicableError : public DomainError {
 public:
  using DomainError::DomainError;
};

class GridOrderError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdelap
