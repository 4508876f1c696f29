#include "sonoforge/error.hpp"

namespace sonoforge {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::UnsupportedFormat: return "unsupported format";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::MissingFile: return "missing file";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Size: return "size error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::EmptyOutput: return "empty output";
    case ErrorKind::DegenerateFilterbank: return "degenerate filterbank";
    case ErrorKind::AtomLength: return "atom length error";
    case ErrorKind::EmptyBatch: return "empty batch";
    case ErrorKind::Label: return "label error";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace sonoforge
