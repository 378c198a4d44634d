#pragma once

#include <stdexcept>
#include <string>

namespace psp {

/// Invalid arguments or configuration; maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data; maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (degenerate samples, bound failures, NaN); exit code 3.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Samples with zero spread in some coordinate; no bandwidth can be fitted.
class DegenerateSamplesError : public NumericError {
public:
  using NumericError::NumericError;
};

} // namespace psp
