#pragma once

#include <stdexcept>
#include <string>

namespace romswe {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
public:
  using Error::Error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A linear solve inside a time stepper failed.
class SolveError : public Error {
public:
  SolveError(const std::string& what, long step = -1, double rcond = -1.0)
      : Error(what), step_(step), rcond_(rcond) {}

  /// Index of the failing time step, or -1 when not known.
  long step() const { return step_; }
  /// Reciprocal condition estimate of the system matrix, or -1 when unavailable.
  double rcond() const { return rcond_; }

private:
  long step_;
  double rcond_;
};

class ResourceError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace romswe
