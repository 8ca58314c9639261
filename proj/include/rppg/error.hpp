#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rppg {

// Every failure the library can report. The CLI maps each kind to its own
// exit code, so append new kinds at the end.
enum class ErrorKind {
  Io = 1,
  MalformedHeader,
  TruncatedPayload,
  UnsupportedVersion,
  RoiOutOfBounds,
  MalformedSidecar,
  NonNumericLine,
  NonIntegerRatio,
  TooManyGaps,
  WindowTooShort,
  BadSize,
  BadPipelineConfig,
  EmptySpectrum,
  TraceTooShort,
  UnusableWindow,
  BadWindowSpec,
  BadCalibration,
  BadConfig,
  ArtifactOutOfRange,
  EmptyReference,
  LengthMismatch,
  EmptyCorpus,
  NoComparableWindows,
  MalformedEstimates,
  MalformedManifest,
  BadArguments,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rppg
