#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riskbench {

enum class ErrorCode {
  MissingControl,
  UnknownControl,
  EmptyImplicatedControls,
  TooManyImplicatedControls,
  LossBelowThreshold,
  ChecksumMismatch,
  BelowAllBands,
  InvalidSchema,
  DuplicateContribution,
  SessionSealed,
  SessionState,
  LengthMismatch,
  IncompleteSession,
  NotEnoughParticipants,
  ConstraintUnsatisfiable,
  DegenerateAnchors,
  NoIncidents,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingControl: return "MissingControl";
    case ErrorCode::UnknownControl: return "UnknownControl";
    case ErrorCode::EmptyImplicatedControls: return "EmptyImplicatedControls";
    case ErrorCode::TooManyImplicatedControls: return "TooManyImplicatedControls";
    case ErrorCode::LossBelowThreshold: return "LossBelowThreshold";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::BelowAllBands: return "BelowAllBands";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::DuplicateContribution: return "DuplicateContribution";
    case ErrorCode::SessionSealed: return "SessionSealed";
    case ErrorCode::SessionState: return "SessionState";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IncompleteSession: return "IncompleteSession";
    case ErrorCode::NotEnoughParticipants: return "NotEnoughParticipants";
    case ErrorCode::ConstraintUnsatisfiable: return "ConstraintUnsatisfiable";
    case ErrorCode::DegenerateAnchors: return "DegenerateAnchors";
    case ErrorCode::NoIncidents: return "NoIncidents";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code; what() is the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace riskbench
