#pragma once

#include <stdexcept>

namespace incdsi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or version-mismatched file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain (NaN entries, bad ranges).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace incdsi
