#include "rppg/error.hpp"

namespace rppg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io error";
    case ErrorKind::MalformedHeader: return "malformed header";
    case ErrorKind::TruncatedPayload: return "truncated payload";
    case ErrorKind::UnsupportedVersion: return "unsupported version";
    case ErrorKind::RoiOutOfBounds: return "roi out of bounds";
    case ErrorKind::MalformedSidecar: return "malformed roi sidecar";
    case ErrorKind::NonNumericLine: return "non-numeric line";
    case ErrorKind::NonIntegerRatio: return "non-integer rate ratio";
    case ErrorKind::TooManyGaps: return "too many gaps";
    case ErrorKind::WindowTooShort: return "window too short";
    case ErrorKind::BadSize: return "bad filter size";
    case ErrorKind::BadPipelineConfig: return "bad pipeline config";
    case ErrorKind::EmptySpectrum: return "empty spectrum";
    case ErrorKind::TraceTooShort: return "trace too short";
    case ErrorKind::UnusableWindow: return "unusable window";
    case ErrorKind::BadWindowSpec: return "bad window spec";
    case ErrorKind::BadCalibration: return "bad calibration";
    case ErrorKind::BadConfig: return "bad simulation config";
    case ErrorKind::ArtifactOutOfRange: return "artifact out of range";
    case ErrorKind::EmptyReference: return "empty reference";
    case ErrorKind::LengthMismatch: return "length mismatch";
    case ErrorKind::EmptyCorpus: return "empty corpus";
    case ErrorKind::NoComparableWindows: return "no comparable windows";
    case ErrorKind::MalformedEstimates: return "malformed estimates";
    case ErrorKind::MalformedManifest: return "malformed manifest";
    case ErrorKind::BadArguments: return "bad arguments";
  }
  return "unknown error";
}

}  // namespace rppg
