#pragma once

#include <stdexcept>
#include <string>

namespace hamnet {

enum class ErrorKind {
  Parameter,       // caller passed an out-of-contract argument
  Config,          // malformed or unknown configuration keys
  Validation,      // input data failed a consistency check
  Io,              // file could not be opened, read or written
  FormatMagic,     // container does not start with the expected magic
  FormatVersion,   // container version is not supported
  FormatTruncated, // container shorter than its header declares
  Format,          // any other malformed file content
  Unsupported,     // well-formed input we deliberately do not handle
  Training,        // optimisation diverged (non-finite loss)
  Internal
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::Parameter, message);
}

}  // namespace hamnet
