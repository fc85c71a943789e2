#pragma once

#include <stdexcept>
#include <string>

namespace roisweep {

enum class ErrorCode {
  InvalidArgument,
  InvalidRange,
  InvalidCount,
  NumericalDegeneracy,
  RayParallel,
  ImageTooSmall,
  EmptyRoi,
  DimensionMismatch,
  FragmentMismatch,
  OutOfRange,
  DegenerateSize,
  IoFailure,
  ParseError,
  NoRois,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace roisweep
