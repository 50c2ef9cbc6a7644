#include "hagedorn/errors.hpp"

namespace hagedorn {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::Cond1Drift: return "Cond1Drift";
    case ErrorCode::SingularA: return "SingularA";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::SupportOverflow: return "SupportOverflow";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::MissingDecayMetadata: return "MissingDecayMetadata";
    case ErrorCode::NotPResolved: return "NotPResolved";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::FitDegenerate: return "FitDegenerate";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hagedorn
