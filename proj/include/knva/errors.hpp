#pragma once

#include <stdexcept>
#include <string>

namespace knva {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arithmetic between an exact and an approximate scalar.
struct ScalarModeError : Error {
  using Error::Error;
};

struct PointMismatch : Error {
  using Error::Error;
};

// A coefficient or table entry outside the faithful/reliable window was requested.
struct WindowError : Error {
  using Error::Error;
};

struct WeightError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// A loaded or constructed object breaks one of its structural invariants.
struct InvariantViolation : Error {
  using Error::Error;
};

}  // namespace knva
