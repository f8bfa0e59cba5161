#pragma once

#include <stdexcept>
#include <string>

namespace termharm {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  NotFound,
  Duplicate,
  Undefined,  // mathematically undefined result (constant input, zero vector, ...)
  State,      // operation not allowed in the current session state
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace termharm
