#pragma once

#include <stdexcept>
#include <string>

namespace qpathnet {

// Base class for every error raised by the engine. Configuration problems
// are reported separately by ConfigError (see config.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when the transition amplitude <phi|U(T)|psi> vanishes, so relative
// amplitudes and weak values are undefined.
class ForbiddenTransition : public Error {
 public:
  using Error::Error;
};

class GridTooNarrow : public Error {
 public:
  using Error::Error;
};

class ZeroProbability : public Error {
 public:
  using Error::Error;
};

}  // namespace qpathnet
