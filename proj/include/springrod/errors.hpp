#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace springrod {

/// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Spring endpoints closer than the degeneracy threshold; the unit axis is
/// undefined and the step is aborted.
class DegenerateSpringError : public Error {
 public:
  DegenerateSpringError(int spring_index, const std::string& what)
      : Error(what), spring_index(spring_index) {}
  int spring_index;
};

/// A state component became NaN/inf during integration (typically dt too
/// large for the stiffness).
class NonFiniteStateError : public Error {
 public:
  NonFiniteStateError(long step, const std::string& what)
      : Error(what), step(step) {}
  long step;
};

/// Normal-equation matrix is numerically singular and no ridge was requested.
class SingularProblemError : public Error {
 public:
  SingularProblemError(double condition, const std::string& what)
      : Error(what), condition(condition) {}
  double condition;
};

/// Gradient requested while a tension-only spring sits exactly on the clamp
/// boundary, where the force law is not differentiable.
class NonSmoothPointError : public Error {
 public:
  NonSmoothPointError(int spring_index, const std::string& what)
      : Error(what), spring_index(spring_index) {}
  int spring_index;
};

/// Control-scale fit requested on data whose commands are all zero.
class NoExcitationError : public Error {
 public:
  using Error::Error;
};

/// Gradient descent produced a non-finite loss.
class DivergedError : public Error {
 public:
  DivergedError(long iteration, const std::string& what)
      : Error(what), iteration(iteration) {}
  long iteration;
};

/// Malformed input file; line is 1-based where applicable, 0 otherwise.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : Error(what), line(line) {}
  long line;
};

/// Well-formed file whose content violates the schema (wrong rod count,
/// non-unit quaternion, missing field, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Trajectory does not match the topology it is being used with.
class InconsistentTrajectoryError : public Error {
 public:
  using Error::Error;
};

}  // namespace springrod
