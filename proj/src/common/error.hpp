#pragma once

#include <stdexcept>
#include <string>

namespace thg {

// Every failure raised by the core carries one of these codes; the C API maps
// them one-to-one onto thg_status values.
enum class ErrorCode {
  InvalidArgument,
  Parse,
  Validation,
  Io,
  Transport,
  FixtureMissing,
  FixtureCorrupt,
  ArticleMissing,
  UndefinedValue,
  Protocol,
  Generation,
  Classification,
  Judgement,
  NotFound,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Transport failures are the only ones worth retrying at a higher level.
  bool retryable() const noexcept { return code_ == ErrorCode::Transport; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace thg
