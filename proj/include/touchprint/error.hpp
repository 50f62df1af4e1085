#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace touchprint {

enum class ErrorCode {
  GrayInput,
  EmptyHistogram,
  EmptyMask,
  DiscardFrame,
  SeparationFailed,
  WrongFingerCount,
  EmptyROI,
  TooSmall,
  NoCandidates,
  NotThin,
  ParseError,
  EmptyTemplate,
  EmptyScores,
  EmptyScoreSet,
  NoAttempts,
  IoError,
  SessionClosed,
  NotDone,
  ConfigError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::GrayInput: return "GrayInput";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DiscardFrame: return "DiscardFrame";
    case ErrorCode::SeparationFailed: return "SeparationFailed";
    case ErrorCode::WrongFingerCount: return "WrongFingerCount";
    case ErrorCode::EmptyROI: return "EmptyROI";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::NotThin: return "NotThin";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyTemplate: return "EmptyTemplate";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::EmptyScoreSet: return "EmptyScoreSet";
    case ErrorCode::NoAttempts: return "NoAttempts";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::NotDone: return "NotDone";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace touchprint
