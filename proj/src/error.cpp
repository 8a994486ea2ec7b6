#include "giffluence/error.hpp"

namespace giffluence {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::MissingTimestamp: return "MISSING_TIMESTAMP";
    case ErrorCode::InvalidDeclaration: return "INVALID_DECLARATION";
    case ErrorCode::OutOfCalendar: return "OUT_OF_CALENDAR";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::Gap: return "GAP";
    case ErrorCode::OutOfOrder: return "OUT_OF_ORDER";
    case ErrorCode::UnknownGif: return "UNKNOWN_GIF";
    case ErrorCode::ZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::TooFewPoints: return "TOO_FEW_POINTS";
    case ErrorCode::EmptyLedger: return "EMPTY_LEDGER";
    case ErrorCode::WindowOutOfRange: return "WINDOW_OUT_OF_RANGE";
    case ErrorCode::RankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::TooFewFirms: return "TOO_FEW_FIRMS";
    case ErrorCode::InsufficientHistory: return "INSUFFICIENT_HISTORY";
    case ErrorCode::TooFewRows: return "TOO_FEW_ROWS";
    case ErrorCode::TooShort: return "TOO_SHORT";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::ConstantInput: return "CONSTANT_INPUT";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::UnknownSeries: return "UNKNOWN_SERIES";
    case ErrorCode::EmptySeries: return "EMPTY_SERIES";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::UnknownSeries:
      return ErrorKind::Configuration;
    case ErrorCode::RankDeficient:
    case ErrorCode::TooFewRows:
    case ErrorCode::TooShort:
    case ErrorCode::Degenerate:
    case ErrorCode::ConstantInput:
    case ErrorCode::ZeroVariance:
    case ErrorCode::TooFewPoints:
    case ErrorCode::TooFewFirms:
    case ErrorCode::InsufficientHistory:
      return ErrorKind::Estimation;
    default:
      return ErrorKind::Data;
  }
}

}  // namespace giffluence
