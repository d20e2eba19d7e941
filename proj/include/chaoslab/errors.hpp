#pragma once

#include <stdexcept>
#include <string>

namespace chaoslab {

enum class ErrorCode {
  InvalidArgument,
  NonConvergent,
  NonFinite,
  GridMismatch,
  GridResolution,
  NoSignChange,
  InvalidConstants,
  RegimeViolation,
  Supercritical,
  NonPositiveDefinite,
  DivergentChain,
  DivergentIntegral,
  DegenerateSample,
  DegenerateInput,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration problem pinned to a dotted field path such as "model.theta".
class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& message);
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace chaoslab
