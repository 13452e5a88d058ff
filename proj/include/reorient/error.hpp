#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reorient {

enum class ErrorCode {
  MissingFile,
  ParseError,
  EmptyClass,
  BadCount,
  TooFewPoints,
  EmptySet,
  DimensionMismatch,
  SizeMismatch,
  NonpositiveDiameter,
  BadVoxel,
  NoConvergence,
  InitialPenetration,
  BadSamplerSource,
  BadSamplerConfig,
  NoSupport,
  BadSpec,
  IoError,
  NoNormals,
  NoPath,
  NoGoalNode,
  BadConfig,
};

/// Stable one-line prefix used on stderr by the CLI, e.g. "E_NO_PATH".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reorient
