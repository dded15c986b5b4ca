#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crowdloc {

enum class ErrorKind {
  invalid_argument,
  shape,
  config,
  io,
  load,
  numeric,
  training,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; the kind drives CLI exit reporting.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void check(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace crowdloc
