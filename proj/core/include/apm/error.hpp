#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apm {

enum class ErrorCode {
  ParseError,
  DuplicateCell,
  EmptyInput,
  InvalidArgument,
  AllCohortsDropped,
  NotObserved,
  BadRank,
  EmptyCohort,
  ZeroCohortWeight,
  RankExceedsObserved,
  TooFewOutcomes,
  DimensionMismatch,
  RankDeficientRestriction,
  SingularGram,
  UnidentifiedTarget,
  MissingTreatedMean,
  DegenerateDenominator,
  TargetEvaluationError,
  ReplicateFailure,
  ZeroSpread,
  OutsideNeighborhood,
  DegenerateCohort,
  DisconnectedDesign,
  UnidentifiedAfterMask,
  HeteroskedasticTruth,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace apm
