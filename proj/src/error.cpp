#include "tcal/error.hpp"

namespace tcal {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateBaselines: return "DEGENERATE_BASELINES";
    case ErrorCode::NonFiniteInput: return "NON_FINITE_INPUT";
    case ErrorCode::ScratchAtCeiling: return "SCRATCH_AT_CEILING";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::DegenerateRange: return "DEGENERATE_RANGE";
    case ErrorCode::UnknownRegime: return "UNKNOWN_REGIME";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::EmptyCollection: return "EMPTY_COLLECTION";
    case ErrorCode::NonFiniteLabel: return "NON_FINITE_LABEL";
    case ErrorCode::BudgetTooSmall: return "BUDGET_TOO_SMALL";
    case ErrorCode::EmptyCandidates: return "EMPTY_CANDIDATES";
    case ErrorCode::UnsupportedLoss: return "UNSUPPORTED_LOSS";
    case ErrorCode::MalformedRow: return "MALFORMED_ROW";
    case ErrorCode::DuplicateRecord: return "DUPLICATE_RECORD";
    case ErrorCode::UnknownField: return "UNKNOWN_FIELD";
    case ErrorCode::DuplicateTask: return "DUPLICATE_TASK";
    case ErrorCode::MalformedBinary: return "MALFORMED_BINARY";
    case ErrorCode::EmptyCurve: return "EMPTY_CURVE";
    case ErrorCode::MissingScratch: return "MISSING_SCRATCH";
    case ErrorCode::InvalidModel: return "INVALID_MODEL";
    case ErrorCode::UnknownTask: return "UNKNOWN_TASK";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow:
    case ErrorCode::DuplicateRecord:
    case ErrorCode::UnknownField:
    case ErrorCode::DuplicateTask:
    case ErrorCode::MalformedBinary:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::NonFiniteLabel:
    case ErrorCode::InvalidModel:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace tcal
