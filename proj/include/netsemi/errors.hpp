#pragma once

#include <stdexcept>
#include <string>

namespace netsemi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed network description, signature mismatch or schema violation.
class SpecError : public Error {
  public:
    using Error::Error;
};

/// Argument outside the domain of an edge function or operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Neumann series guard violated: the requested lambda is too close to the spectrum bound.
class DivergenceError : public Error {
  public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
  public:
    using Error::Error;
};

} // namespace netsemi
