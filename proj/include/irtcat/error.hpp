#pragma once

#include <stdexcept>
#include <string>

namespace irtcat {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Validation = 3,
  Convergence = 4,
  Io = 5,
  OutOfItems = 6,
  InsufficientData = 7,
  DegeneratePosterior = 8,
  Internal = 9,
};

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

}  // namespace irtcat
