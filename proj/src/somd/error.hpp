#pragma once

#include <stdexcept>
#include <string>

namespace somd {

// Values mirror somd_status in the public C header.
enum class ErrorCode : int {
  InvalidArgument = 1,
  MalformedLine,
  UnknownLabel,
  EmptySentence,
  InvalidIOB2,
  OverlappingSpans,
  SpanOutOfRange,
  LengthMismatch,
  NonMonotoneWordIndex,
  GapInWordIndices,
  AllZeroCounts,
  EmptyBatchAfterFiltering,
  EmptySupervision,
  IncompatibleTagSet,
  SentenceCountMismatch,
  TokenMismatch,
  InvalidConfig,
  FileNotFound,
  Io,
  ModelFormat,
  Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace somd
