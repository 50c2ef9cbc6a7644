#pragma once

#include <stdexcept>
#include <string>

namespace hagedorn {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  InvalidArgument,
  StepSizeUnderflow,
  Cond1Drift,
  SingularA,
  FrameMismatch,
  SupportOverflow,
  UnsupportedOrder,
  MissingDecayMetadata,
  NotPResolved,
  DegenerateProfile,
  EmptyWindow,
  GridTooCoarse,
  LeakageDetected,
  NoConvergence,
  FitDegenerate,
  ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) raise(ErrorCode::InvalidArgument, what);
}

}  // namespace hagedorn
