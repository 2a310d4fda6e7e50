#pragma once

#include <stdexcept>
#include <string>

namespace altbm {

// Base of every error thrown by the library. `kind()` is a stable
// machine-readable tag used by the CLI error object.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Input that violates a documented precondition.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}

 protected:
  InvalidArgument(std::string kind, const std::string& what) : Error(std::move(kind), what) {}
};

class RateTooSmall : public InvalidArgument {
 public:
  explicit RateTooSmall(const std::string& what) : InvalidArgument("RateTooSmall", what) {}
};

class InvalidMap : public InvalidArgument {
 public:
  explicit InvalidMap(const std::string& what) : InvalidArgument("InvalidMap", what) {}
};

class OutOfHorizon : public InvalidArgument {
 public:
  explicit OutOfHorizon(const std::string& what) : InvalidArgument("OutOfHorizon", what) {}
};

class IndexBeyondHorizon : public InvalidArgument {
 public:
  explicit IndexBeyondHorizon(const std::string& what)
      : InvalidArgument("IndexBeyondHorizon", what) {}
};

class NoObservations : public InvalidArgument {
 public:
  explicit NoObservations(const std::string& what) : InvalidArgument("NoObservations", what) {}
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(const std::string& what) : InvalidArgument("InvalidConfig", what) {}
};

// Failures of a numerical method on otherwise valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public NumericalError {
 public:
  explicit SingularMatrix(const std::string& what) : NumericalError("SingularMatrix", what) {}
};

class InversionDiverged : public NumericalError {
 public:
  explicit InversionDiverged(const std::string& what)
      : NumericalError("InversionDiverged", what) {}
};

class RangeViolation : public NumericalError {
 public:
  explicit RangeViolation(const std::string& what) : NumericalError("RangeViolation", what) {}
};

}  // namespace altbm
