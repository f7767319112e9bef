#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gpspec {

/// Failure categories raised by the solver stack. The CLI maps them onto exit codes.
enum class ErrorCode {
  kBasisTooLarge,
  kAliasingUnresolvable,
  kBasisMismatch,
  kDimensionMismatch,
  kDegenerateProjector,
  kInvalidArgument,
  kNonconvergence,
  kDegenerateGroundState,
  kStagnation,
  kCoercivityViolated,
  kCorrectionTooLarge,
  kNearSingularBvp,
  kIndefiniteOperator,
  kDiagonalNotInvertible,
  kCertificateUnsupported,
  kSizeCapExceeded,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBasisTooLarge: return "basis-too-large";
    case ErrorCode::kAliasingUnresolvable: return "aliasing-unresolvable";
    case ErrorCode::kBasisMismatch: return "basis-mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateProjector: return "degenerate-projector";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kNonconvergence: return "nonconvergence";
    case ErrorCode::kDegenerateGroundState: return "degenerate-ground-state";
    case ErrorCode::kStagnation: return "stagnation";
    case ErrorCode::kCoercivityViolated: return "coercivity-violated";
    case ErrorCode::kCorrectionTooLarge: return "correction-too-large";
    case ErrorCode::kNearSingularBvp: return "near-singular-bvp";
    case ErrorCode::kIndefiniteOperator: return "indefinite-operator";
    case ErrorCode::kDiagonalNotInvertible: return "diagonal-not-invertible";
    case ErrorCode::kCertificateUnsupported: return "certificate-unsupported";
    case ErrorCode::kSizeCapExceeded: return "size-cap-exceeded";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        double value = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        value_(value) {}

  ErrorCode code() const noexcept { return code_; }

  /// Diagnostic number attached to the failure (last residual, Ritz value, ...), NaN if none.
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace gpspec
