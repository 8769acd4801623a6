#pragma once

#include <stdexcept>
#include <string>

namespace qgraph {

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  UnknownVertex,
  DuplicateVertex,
  LoopEdge,
  ParallelEdge,
  NonpositiveLength,
  NonpositiveConductance,
  NegativePotential,
  MeshTooCoarse,
  BrokenSpaceInput,
  TooManyModes,
  SolverFailure,
  NonpositiveShift,
  MeshMismatch,
  SingularVertexSystem,
  GammaOverflow,
  TraceDivergence,
  NonFiniteState,
  InsufficientModes,
  ValidationError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace qgraph
