#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qstab {

enum class ErrorCode {
  NotPositiveDefinite,
  NoConvergence,
  DimensionMismatch,
  TooFewRuns,
  IndexOutOfRange,
  DegenerateData,
  NonPositiveEntry,
  DegenerateGrid,
  ZeroVariance,
  SingularParameters,
  InvalidArgument,
  InvariantViolation,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SingularParameters: return "SingularParameters";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace qstab
