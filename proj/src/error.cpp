#include "snnopt/error.hpp"

namespace snnopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::UnsortedEvents: return "UnsortedEvents";
    case ErrorCode::ReservedBitsSet: return "ReservedBitsSet";
    case ErrorCode::BadRow: return "BadRow";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::UnsupportedWindow: return "UnsupportedWindow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::MissingTrace: return "MissingTrace";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyAxis: return "EmptyAxis";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::NoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace snnopt
