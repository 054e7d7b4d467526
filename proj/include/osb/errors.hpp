#pragma once

#include <stdexcept>
#include <string>

namespace osb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (k out of range, p < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration was requested for a family larger than the enumeration cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Malformed matrix, family or corpus input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace osb
