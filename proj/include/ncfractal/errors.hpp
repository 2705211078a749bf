#pragma once

#include <stdexcept>
#include <string>

namespace ncfractal {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block shapes or algebras do not line up.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a mathematical invariant (not self-adjoint, not a projection, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A theorem-level hypothesis does not hold for the given inputs.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Floating point repair was not possible within the allowed slack.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A configured budget (word count) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncfractal
