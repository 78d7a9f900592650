// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tdgemm {

// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// c * max|x| left the exact-integer range of the native format.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class UndefinedSnrError : public Error {
 public:
  using Error::Error;
};

// Zero standard deviation or zero amplitude; callers fall back to the plain path.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class CalibrationMissingError : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstraintError : public Error {
 public:
  InfeasibleConstraintError(const std::string& what, double achievable)
      : Error(what), achievable_(achievable) {}

  // Best value the constraint could have asked for.
  double achievable() const noexcept { return achievable_; }

 private:
  double achievable_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TimerResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdgemm
