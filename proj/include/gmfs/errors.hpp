#pragma once

#include <stdexcept>
#include <string>

namespace gmfs {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A requested computation exceeds a configured size or enumeration budget.
/// Maps to CLI exit code 3.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between objects (alphabets, table dims, array lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Integer arithmetic would overflow.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Q-table file could not be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmfs
