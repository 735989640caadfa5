#pragma once

#include <stdexcept>
#include <string>

namespace dndf {

/// Base of all toolkit errors. ValidationError and its children map to
/// exit code 1 in the CLI; everything else maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Wrong or missing columns / fields in an input schema.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A cell or token that could not be parsed; carries the row index in the message.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Incompatible tensor shapes; the message names both operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or other numeric failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dndf
