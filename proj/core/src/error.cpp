#include "apm/error.hpp"

namespace apm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllCohortsDropped: return "AllCohortsDropped";
    case ErrorCode::NotObserved: return "NotObserved";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::EmptyCohort: return "EmptyCohort";
    case ErrorCode::ZeroCohortWeight: return "ZeroCohortWeight";
    case ErrorCode::RankExceedsObserved: return "RankExceedsObserved";
    case ErrorCode::TooFewOutcomes: return "TooFewOutcomes";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficientRestriction: return "RankDeficientRestriction";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::UnidentifiedTarget: return "UnidentifiedTarget";
    case ErrorCode::MissingTreatedMean: return "MissingTreatedMean";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::TargetEvaluationError: return "TargetEvaluationError";
    case ErrorCode::ReplicateFailure: return "ReplicateFailure";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::OutsideNeighborhood: return "OutsideNeighborhood";
    case ErrorCode::DegenerateCohort: return "DegenerateCohort";
    case ErrorCode::DisconnectedDesign: return "DisconnectedDesign";
    case ErrorCode::UnidentifiedAfterMask: return "UnidentifiedAfterMask";
    case ErrorCode::HeteroskedasticTruth: return "HeteroskedasticTruth";
  }
  return "Unknown";
}

}  // namespace apm
