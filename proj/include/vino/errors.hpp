#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vino {

enum class ErrorCode {
  kDegenerateFrequencies,
  kInvalidDamage,
  kInvalidArgument,
  kNonConvergence,
  kNegativeInput,
  kNonPositiveDenominator,
  kNonPositiveFrequency,
  kEmptyBand,
  kSingularEffectiveMatrix,
  kNonFiniteState,
  kOutOfSpan,
  kCholeskyFailure,
  kPeakOutOfRange,
  kShapeMismatch,
  kMissingForwardState,
  kZeroTargetNorm,
  kNaNLoss,
  kEmptyTrainable,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (tests, CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateFrequencies: return "DegenerateFrequencies";
    case ErrorCode::kInvalidDamage: return "InvalidDamage";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kNegativeInput: return "NegativeInput";
    case ErrorCode::kNonPositiveDenominator: return "NonPositiveDenominator";
    case ErrorCode::kNonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::kEmptyBand: return "EmptyBand";
    case ErrorCode::kSingularEffectiveMatrix: return "SingularEffectiveMatrix";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kOutOfSpan: return "OutOfSpan";
    case ErrorCode::kCholeskyFailure: return "CholeskyFailure";
    case ErrorCode::kPeakOutOfRange: return "PeakOutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingForwardState: return "MissingForwardState";
    case ErrorCode::kZeroTargetNorm: return "ZeroTargetNorm";
    case ErrorCode::kNaNLoss: return "NaNLoss";
    case ErrorCode::kEmptyTrainable: return "EmptyTrainable";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace vino
