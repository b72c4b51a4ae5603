#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wex {

enum class ErrorCode {
  config,
  precondition,
  not_found,
  transport,
  skipped,
  integrity,
  not_projectable,
  protocol,
  evaluation,
  training,
  conflict,
  upstream_missing,
  invalid,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the whole library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace wex
