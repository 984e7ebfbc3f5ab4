#pragma once

#include <stdexcept>
#include <string>

namespace ampcg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed graph: unknown vertex, self-loop, duplicate or conflicting edge.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// The mixed graph contains a semi-directed cycle.
class ChainGraphError : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the parameter space (e.g. a concentration
/// matrix that is not positive definite), or a covariance is not in the model.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Singular normal equations / rank condition n >= |tau| + |pa(tau)| violated.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files or command-line arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ampcg
