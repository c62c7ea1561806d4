#pragma once

#include <stdexcept>
#include <string>

namespace qfilter {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// Operands with incompatible shapes (dims, channel counts, non-square matrices).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (out-of-range parameters, non-unitary S, bad files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A propagated state left the physical set by more than the hard-fail threshold.
class IntegrationDiverged : public Error {
 public:
  using Error::Error;
};

/// A photocount was supplied while the counting rate is numerically zero.
class ImpossibleJump : public Error {
 public:
  using Error::Error;
};

/// Closed-form and Itô-algebra commutativity verdicts disagreed.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace qfilter
