#pragma once

#include <stdexcept>
#include <string>

namespace despso {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (violated precondition).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two particles share a position, so the repulsive potential diverges.
class CoincidentPoints : public Error {
 public:
  using Error::Error;
};

/// The initial point set has zero Frobenius norm.
class ZeroNorm : public Error {
 public:
  using Error::Error;
};

/// A low-discrepancy matrix does not have the shape the swarm needs.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// The objective returned NaN or an infinity.
class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class UnknownSurface : public Error {
 public:
  using Error::Error;
};

/// Syntax or semantic error in an expression or problem file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace despso
