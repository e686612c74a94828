#include "hamnet/error.hpp"

namespace hamnet {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Config: return "config";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::FormatMagic: return "format-magic";
    case ErrorKind::FormatVersion: return "format-version";
    case ErrorKind::FormatTruncated: return "format-truncated";
    case ErrorKind::Format: return "format";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Training: return "training";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace hamnet
