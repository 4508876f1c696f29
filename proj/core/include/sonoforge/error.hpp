#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sonoforge {

enum class ErrorKind {
  Format,           // malformed container or bad magic
  UnsupportedFormat,
  Truncation,
  Schema,           // missing CSV column, bad config key
  MissingFile,
  Range,            // value outside its admissible range
  Validation,
  Domain,           // mathematical domain violation
  Size,             // length / count constraints
  Shape,            // tensor or matrix shape mismatch
  EmptyOutput,
  DegenerateFilterbank,
  AtomLength,
  EmptyBatch,
  Label,
  Geometry,
  NonFinite,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. `kind()` lets callers branch on the
/// failure category without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace sonoforge
