#pragma once

#include <stdexcept>
#include <string>

namespace tc {

// Error categories. The CLI maps them onto exit codes:
// usage -> 1, data -> 2, numerical -> 3.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (CSV rows, dates, gaps, tables).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration file or coefficient table.
class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Both the numerator and denominator of a ratio vanish, or a filter
/// degenerates (e.g. non-positive retained weight sum).
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Augmented design loses rank after collinear regressors were dropped.
class TooManyOutliers : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tc
