#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sensprune {

enum class ErrorCode {
  InvalidParameter,
  ZeroSensitivity,
  ShapeMismatch,
  IndexOutOfRange,
  ParseError,
  LayerTypeMismatch,
  BudgetExceedsWidth,
  Unsupported,
  DegenerateSet,
  InvalidActivation,
  InvalidSubset,
  NonConvergent,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Validation errors are caller mistakes (CLI exit code 1); the rest are
/// runtime failures (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sensprune
