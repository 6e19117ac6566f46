#pragma once

#include <stdexcept>
#include <string>

namespace dcpep {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid numeric argument or violated precondition.
struct ParameterError : Error {
  using Error::Error;
};

// Vector/matrix sizes disagree.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Trajectory metadata disagrees with the requested function class.
struct ClassMismatch : Error {
  using Error::Error;
};

// A closed-form coefficient has a vanishing denominator.
struct DegenerateError : Error {
  using Error::Error;
};

// A matrix factorization failed (indefinite or numerically singular input).
struct FactorizationError : Error {
  using Error::Error;
};

// The conic solver could not reach the requested accuracy.
struct SolverFailure : Error {
  using Error::Error;
};

// An inner subproblem solution failed its optimality check.
struct SubproblemFailure : Error {
  using Error::Error;
};

// File or stream read/write problem, including format violations.
struct IoError : Error {
  using Error::Error;
};

// Broken internal invariant; indicates a bug, not bad user input.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace dcpep
