#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spacecheck {

enum class ErrorCode {
  Bounds,
  InvalidToken,
  UnknownServer,
  UnknownBlock,
  DuplicateBlock,
  CapacityExceeded,
  ServerCrashed,
  AlreadyCrashed,
  MeasurementUnavailable,
  ServerNotEmpty,
  EmptyServer,
  NonMonotoneTick,
  InconsistentRecord,
  MalformedLog,
  Parse,
  VersionMismatch,
  Truncated,
  Configuration,
  Unrecoverable,
  NotGranted,
  Usage,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures additionally name the offending line (1-based).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spacecheck
