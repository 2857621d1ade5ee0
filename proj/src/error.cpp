// SPDX-License-Identifier: Apache-2.0
#include "usct/error.hpp"

namespace usct {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidMedium: return "InvalidMedium";
    case ErrorCode::UnstableTimestep: return "UnstableTimestep";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingFrames: return "MissingFrames";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  // 1 is left for CLI usage errors reported by the argument parser.
  return 10 + static_cast<int>(code);
}

}  // namespace usct
