#ifndef PRIVLR_ERROR_HPP
#define PRIVLR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace privlr {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates its precondition (non-positive
/// epsilon, empty upload list, out-of-range degree, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data: ragged CSV, unparseable cells,
/// dimension mismatches, unnormalized records.
class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

/// Non-finite values produced while optimizing.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int step) : Error(what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace privlr

#endif  // PRIVLR_ERROR_HPP
