#include "membrane/error.hpp"

namespace membrane {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::OverlappingBoundaries: return "OverlappingBoundaries";
    case ErrorCode::PartialOverlap: return "PartialOverlap";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::OnBoundary: return "OnBoundary";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::BoundaryTimeScale: return "BoundaryTimeScale";
    case ErrorCode::RootHasNoSiblings: return "RootHasNoSiblings";
    case ErrorCode::NoAdmissibleChain: return "NoAdmissibleChain";
    case ErrorCode::MultipleAdmissibleChainsWithEmptyTrapSet:
      return "MultipleAdmissibleChainsWithEmptyTrapSet";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StartInsideTarget: return "StartInsideTarget";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::TimeBudgetExceeded: return "TimeBudgetExceeded";
    case ErrorCode::CollarTooWide: return "CollarTooWide";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace membrane
