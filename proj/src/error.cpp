#include "sensprune/error.hpp"

namespace sensprune {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ZeroSensitivity: return "ZeroSensitivity";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LayerTypeMismatch: return "LayerTypeMismatch";
    case ErrorCode::BudgetExceedsWidth: return "BudgetExceedsWidth";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::DegenerateSet: return "DegenerateSet";
    case ErrorCode::InvalidActivation: return "InvalidActivation";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroSensitivity:
    case ErrorCode::NonConvergent:
    case ErrorCode::DegenerateSet:
    case ErrorCode::IoError:
      return false;
    default:
      return true;
  }
}

}  // namespace sensprune
