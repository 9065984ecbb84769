#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

enum class ErrorCode {
  InvalidScene,
  OverlappingBoundaries,
  PartialOverlap,
  UnknownId,
  OnBoundary,
  NotOnBoundary,
  BoundaryTimeScale,
  RootHasNoSiblings,
  NoAdmissibleChain,
  MultipleAdmissibleChainsWithEmptyTrapSet,
  OracleFailure,
  SingularSystem,
  StartInsideTarget,
  GridTooCoarse,
  LinearSolveFailure,
  StepUnderflow,
  TimeBudgetExceeded,
  CollarTooWide,
  InsufficientSamples,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace membrane
