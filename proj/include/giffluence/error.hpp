#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace giffluence {

enum class ErrorCode {
  // corpus
  MalformedRecord,
  MissingTimestamp,
  InvalidDeclaration,
  OutOfCalendar,
  SchemaMismatch,
  Gap,
  // index
  OutOfOrder,
  UnknownGif,
  ZeroVariance,
  TooFewPoints,
  EmptyLedger,
  // metrics / econ
  WindowOutOfRange,
  RankDeficient,
  TooFewFirms,
  InsufficientHistory,
  TooFewRows,
  TooShort,
  Degenerate,
  ConstantInput,
  // configuration / resolution
  Config,
  UnknownSeries,
  EmptySeries,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Broad failure category, used by the CLI to pick an exit code.
enum class ErrorKind { Configuration, Data, Estimation };

ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace giffluence
