#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace snnopt {

enum class ErrorCode {
  // event_io
  MalformedHeader,
  TruncatedRecord,
  CoordinateOutOfRange,
  TimestampOutOfRange,
  UnsortedEvents,
  ReservedBitsSet,
  BadRow,
  WindowTooLarge,
  MissingManifest,
  UnreadableFile,
  // spiking_core
  UnsupportedWindow,
  ShapeMismatch,
  BadCheckpoint,
  // stbp_training
  MissingTrace,
  EmptyDataset,
  // dse_engine
  EmptyAxis,
  MissingBaseline,
  NoFeasiblePoint,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Domain error raised by every module. The CLI maps it to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  /// 1-based line number for BadRow, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace snnopt
