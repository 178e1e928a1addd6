#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foliata {

enum class ErrorCode {
  InvalidParams,
  NoRealSolution,
  DriftExceeded,
  NonOscillatory,
  NotDegenerate,
  GridMismatch,
  AllSingular,
  TooFewNodes,
  NonConverged,
  ChartOverflow,
  SingularCrossing,
  NotFlat,
  PeriodUnavailable,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NoRealSolution: return "NoRealSolution";
    case ErrorCode::DriftExceeded: return "DriftExceeded";
    case ErrorCode::NonOscillatory: return "NonOscillatory";
    case ErrorCode::NotDegenerate: return "NotDegenerate";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::AllSingular: return "AllSingular";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::NonConverged: return "NonConverged";
    case ErrorCode::ChartOverflow: return "ChartOverflow";
    case ErrorCode::SingularCrossing: return "SingularCrossing";
    case ErrorCode::NotFlat: return "NotFlat";
    case ErrorCode::PeriodUnavailable: return "PeriodUnavailable";
  }
  return "Unknown";
}

/// Domain error raised by every foliata operation. The code identifies the
/// failure class; the message carries the offending values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace foliata
