#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcal {

enum class ErrorCode {
  DegenerateBaselines,
  NonFiniteInput,
  ScratchAtCeiling,
  GridMismatch,
  DegenerateRange,
  UnknownRegime,
  ShapeMismatch,
  EmptyCollection,
  NonFiniteLabel,
  BudgetTooSmall,
  EmptyCandidates,
  UnsupportedLoss,
  MalformedRow,
  DuplicateRecord,
  UnknownField,
  DuplicateTask,
  MalformedBinary,
  EmptyCurve,
  MissingScratch,
  InvalidModel,
  UnknownTask,
  Io,
};

// Stable upper-snake identifier, used for greppable CLI error lines.
std::string_view code_name(ErrorCode code) noexcept;

// True for codes that describe bad or unreadable input (CLI exit 1);
// everything else is a semantic failure (CLI exit 2).
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tcal
