#include "reorient/error.hpp"

namespace reorient {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "E_MISSING_FILE";
    case ErrorCode::ParseError: return "E_PARSE";
    case ErrorCode::EmptyClass: return "E_EMPTY_CLASS";
    case ErrorCode::BadCount: return "E_BAD_COUNT";
    case ErrorCode::TooFewPoints: return "E_TOO_FEW_POINTS";
    case ErrorCode::EmptySet: return "E_EMPTY_SET";
    case ErrorCode::DimensionMismatch: return "E_DIMENSION_MISMATCH";
    case ErrorCode::SizeMismatch: return "E_SIZE_MISMATCH";
    case ErrorCode::NonpositiveDiameter: return "E_NONPOSITIVE_DIAMETER";
    case ErrorCode::BadVoxel: return "E_BAD_VOXEL";
    case ErrorCode::NoConvergence: return "E_NO_CONVERGENCE";
    case ErrorCode::InitialPenetration: return "E_INITIAL_PENETRATION";
    case ErrorCode::BadSamplerSource: return "E_BAD_SAMPLER_SOURCE";
    case ErrorCode::BadSamplerConfig: return "E_BAD_SAMPLER_CONFIG";
    case ErrorCode::NoSupport: return "E_NO_SUPPORT";
    case ErrorCode::BadSpec: return "E_BAD_SPEC";
    case ErrorCode::IoError: return "E_IO";
    case ErrorCode::NoNormals: return "E_NO_NORMALS";
    case ErrorCode::NoPath: return "E_NO_PATH";
    case ErrorCode::NoGoalNode: return "E_NO_GOAL_NODE";
    case ErrorCode::BadConfig: return "E_BAD_CONFIG";
  }
  return "E_UNKNOWN";
}

}  // namespace reorient
