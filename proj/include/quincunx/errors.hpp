#pragma once

#include <stdexcept>
#include <string>

namespace quincunx {

// Base for all library errors. The CLI maps ConfigError to exit code 2 and
// every other Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CutoffTooSmallError : public Error {
 public:
  using Error::Error;
};

class DispersiveViolationError : public Error {
 public:
  using Error::Error;
};

class StepInstabilityError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class DurationError : public Error {
 public:
  using Error::Error;
};

class RegressionError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class TomographyError : public Error {
 public:
  using Error::Error;
};

}  // namespace quincunx
