#pragma once

#include <stdexcept>
#include <string>

namespace edr {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index, mode, split point or count outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Operand extents do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or unreadable/unwritable path.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of the numerical core.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Right-hand matrix of a generalized problem is not positive definite.
class DefinitenessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Not enough usable eigenpairs (rank deficiency, vanishing operator).
class RankError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Degenerate local geometry, e.g. a singular reconstruction system.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace edr
