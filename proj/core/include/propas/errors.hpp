#pragma once

#include <stdexcept>
#include <string>

namespace propas {

// Base for every recoverable failure raised by the library. Precondition
// violations on scalar arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files or columns do not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnitUnknownError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class MissingPitotError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

// A numerical procedure could not produce a usable answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NoBracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroVelocityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Nothing left to evaluate once the regime gate has been applied.
class EmptyAfterGateError : public Error {
 public:
  using Error::Error;
};

}  // namespace propas
