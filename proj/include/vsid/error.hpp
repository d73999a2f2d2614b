#pragma once

#include <stdexcept>
#include <string>

namespace vsid {

enum class ErrorCode {
  kEmptyInput,
  kAllSilence,
  kTooShort,
  kLagTooLarge,
  kDegenerateFrame,
  kDegenerateResidual,
  kNumericalFailure,
  kUnstableFilter,
  kNoFeatures,
  kFilterbankTooDense,
  kInsufficientData,
  kDimError,
  kFeatureKindMismatch,
  kInvalidArgument,
  kFormatError,
  kIoError,
};

const char* ErrorCodeName(ErrorCode code);

/// Every failure in the library surfaces as an Error carrying a code, so
/// callers can skip recoverable cases (degenerate frames) and report the rest.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vsid
