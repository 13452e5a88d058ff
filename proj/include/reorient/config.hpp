#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "reorient/dataset.hpp"
#include "reorient/grasp.hpp"
#include "reorient/pipeline.hpp"
#include "reorient/stability.hpp"

namespace reorient {

/// Every tunable of a run, grouped by module. Angles are radians, lengths
/// meters.
struct RunConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t scene_size = kDefaultSceneSize;
  StabilityParams stability;
  SamplerConfig sampler;
  PipelineParams pipeline;
  std::size_t n_drop = 50;
  std::size_t n_init = 5;
  SweepParams sweep;
  GraspParams grasp;
  double h = 0.10;
  /// Jaw opening for approach and release; 0 means the gripper maximum.
  double opening = 0.0;

  /// Throws BadConfig.
  void validate() const;

  double effective_opening() const { return opening > 0.0 ? opening : grasp.gripper.max_opening; }

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys and wrong types throw
  /// BadConfig, as do out-of-range values.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  bool operator==(const RunConfig& other) const { return to_json() == other.to_json(); }
};

}  // namespace reorient
