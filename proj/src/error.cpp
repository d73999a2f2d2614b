#include "vsid/error.hpp"

namespace vsid {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kAllSilence: return "AllSilence";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kLagTooLarge: return "LagTooLarge";
    case ErrorCode::kDegenerateFrame: return "DegenerateFrame";
    case ErrorCode::kDegenerateResidual: return "DegenerateResidual";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kUnstableFilter: return "UnstableFilter";
    case ErrorCode::kNoFeatures: return "NoFeatures";
    case ErrorCode::kFilterbankTooDense: return "FilterbankTooDense";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kDimError: return "DimError";
    case ErrorCode::kFeatureKindMismatch: return "FeatureKindMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace vsid
