#include "roisweep/errors.hpp"

namespace roisweep {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::NumericalDegeneracy: return "NumericalDegeneracy";
    case ErrorCode::RayParallel: return "RayParallel";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyRoi: return "EmptyRoi";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::FragmentMismatch: return "FragmentMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateSize: return "DegenerateSize";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NoRois: return "NoRois";
  }
  return "Unknown";
}

}  // namespace roisweep
