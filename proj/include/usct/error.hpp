// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace usct {

// Error classes shared by every module. The CLI maps each one to its own exit
// code, so new values must be appended, never reordered.
enum class ErrorCode {
  InvalidArgument = 1,
  InvalidMedium,
  UnstableTimestep,
  NumericalBlowup,
  InvalidShape,
  ShapeMismatch,
  MissingFrames,
  InfeasibleSpec,
  FormatError,
  ChecksumMismatch,
  UnsupportedVersion,
  InvariantViolation,
  ZeroSignal,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Process exit code for an error class (0 is reserved for success).
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Container parse failure; carries the byte offset where decoding stopped.
class FormatError : public Error {
 public:
  FormatError(ErrorCode code, const std::string& message, std::size_t offset)
      : Error(code, message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace usct
