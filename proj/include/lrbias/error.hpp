#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrbias {

enum class ErrorCode {
  InvalidArgument,
  NotSymmetric,
  NotPositiveDefinite,
  DegenerateSpectrum,
  DimensionMismatch,
  SingularKernel,
  SingularSystem,
  AlreadyBelowLevelSet,
  WrongRegime,
  InvalidRegime,
  ZeroDenominator,
  ZeroInitialization,
  RegimeMismatch,
  LevelSetMismatch,
  InfeasibleWindow,
  EmptyTestSet,
  ParseError,
  ValidationError,
  IoError,
  CertificationFailed,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::AlreadyBelowLevelSet: return "AlreadyBelowLevelSet";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ZeroInitialization: return "ZeroInitialization";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::LevelSetMismatch: return "LevelSetMismatch";
    case ErrorCode::InfeasibleWindow: return "InfeasibleWindow";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace lrbias
