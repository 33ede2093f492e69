#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volut {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kFormat,
  kCapacity,
  kProtocol,
  kTimeout,
  kInternal,
};

const char* error_code_name(ErrorCode code);

// Every failure raised by the core carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, std::string_view what) {
  if (!condition) fail(ErrorCode::kInvalidArgument, std::string(what));
}

}  // namespace volut
