#include "qgraph/error.hpp"

namespace qgraph {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::DuplicateVertex: return "DuplicateVertex";
    case ErrorKind::LoopEdge: return "LoopEdge";
    case ErrorKind::ParallelEdge: return "ParallelEdge";
    case ErrorKind::NonpositiveLength: return "NonpositiveLength";
    case ErrorKind::NonpositiveConductance: return "NonpositiveConductance";
    case ErrorKind::NegativePotential: return "NegativePotential";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::BrokenSpaceInput: return "BrokenSpaceInput";
    case ErrorKind::TooManyModes: return "TooManyModes";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::NonpositiveShift: return "NonpositiveShift";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::SingularVertexSystem: return "SingularVertexSystem";
    case ErrorKind::GammaOverflow: return "GammaOverflow";
    case ErrorKind::TraceDivergence: return "TraceDivergence";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InsufficientModes: return "InsufficientModes";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace qgraph
