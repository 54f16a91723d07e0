#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oek {

enum class ErrorCode {
  ZeroNorm,
  DimMismatch,
  EmptyInput,
  NonFinite,
  IndexOutOfRange,
  LengthMismatch,
  NonFiniteEvaluation,
  InvalidPool,
  MissingReference,
  ZeroReferenceAccuracy,
  SpanGap,
  NonPositiveCount,
  TooFewScores,
  MissingExpectedLength,
  BadDim,
  InvalidArgument,
  DivergedLoss,
  UnknownLanguage,
  ParseError,
  OverlapDetected,
  FormatError,
  IoError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::InvalidPool: return "InvalidPool";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::ZeroReferenceAccuracy: return "ZeroReferenceAccuracy";
    case ErrorCode::SpanGap: return "SpanGap";
    case ErrorCode::NonPositiveCount: return "NonPositiveCount";
    case ErrorCode::TooFewScores: return "TooFewScores";
    case ErrorCode::MissingExpectedLength: return "MissingExpectedLength";
    case ErrorCode::BadDim: return "BadDim";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::UnknownLanguage: return "UnknownLanguage";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OverlapDetected: return "OverlapDetected";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code is stable and machine
/// checkable; the message carries context such as the offending row.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace oek
