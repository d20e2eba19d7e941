#include "chaoslab/errors.hpp"

#include <utility>

namespace chaoslab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridResolution: return "GridResolution";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::InvalidConstants: return "InvalidConstants";
    case ErrorCode::RegimeViolation: return "RegimeViolation";
    case ErrorCode::Supercritical: return "Supercritical";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::DivergentChain: return "DivergentChain";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ConfigError::ConfigError(std::string field_path, const std::string& message)
    : Error(ErrorCode::ConfigError, field_path + ": " + message),
      field_path_(std::move(field_path)) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace chaoslab
