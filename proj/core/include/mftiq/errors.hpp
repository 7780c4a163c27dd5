#pragma once

#include <stdexcept>
#include <string>

namespace mftiq {

// Root of every error thrown by the library. The CLI maps subclasses to exit
// codes: DataError and its children are "bad input" (2), InvariantError is an
// internal bug (3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class ArgumentError : public DataError {
 public:
  using DataError::DataError;
};

class IndexError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class NotFoundError : public IoError {
 public:
  NotFoundError(const std::string& what, int a, int b)
      : IoError(what), a_(a), b_(b) {}

  int a() const { return a_; }
  int b() const { return b_; }

 private:
  int a_;
  int b_;
};

class StateError : public DataError {
 public:
  using DataError::DataError;
};

class DegeneracyError : public DataError {
 public:
  using DataError::DataError;
};

class EstimationFailure : public DataError {
 public:
  using DataError::DataError;
};

class SingularTransferError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedMetricError : public DataError {
 public:
  using DataError::DataError;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace mftiq
