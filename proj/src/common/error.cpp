#include "crowdloc/common/error.hpp"

namespace crowdloc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::shape: return "shape";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::load: return "load";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::training: return "training";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace crowdloc
