#pragma once

#include <stdexcept>
#include <string>

namespace s2p {

/// Base of every exception thrown by the library. The CLI maps the
/// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/profile extents that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered, or a numeric precondition violated.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or report file that cannot be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. a backward call with a cache from another layer.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace s2p
