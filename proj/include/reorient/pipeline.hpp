#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "reorient/metrics.hpp"
#include "reorient/scene.hpp"
#include "reorient/stability.hpp"

namespace reorient {

enum class SamplerKind { GaussianPrior, LibraryPrior, ExternalFile };

std::string_view sampler_kind_name(SamplerKind k);
SamplerKind sampler_kind_from_name(std::string_view s);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::GaussianPrior;
  std::size_t M = 512;
  std::uint64_t seed = 0;
  double translation_spread = 0.03;  ///< m, std. dev. around the prior mean
  double orientation_spread = 0.3;   ///< rad, library_prior jitter
  std::filesystem::path path;        ///< library or external proposal file

  /// Throws BadSamplerConfig.
  void validate() const;
};

struct PlacementCandidate {
  Pose6D delta;
  PointList transformed_object;
  StabilityReport report;
  int stage = 1;
  std::string error;  ///< non-empty when scoring failed

  bool ok() const { return error.empty(); }
};

struct PipelineParams {
  double s1_min = 0.5;
  double delta1 = 0.003;
  double s2_min = 0.99;
  double delta2 = 0.02;
  std::size_t n_seeds = 2;
  /// Stage-1 survivors refined, best first.
  std::size_t max_refine = 64;
  double jitter_orientation = 15.0 * std::numbers::pi / 180.0;
  double jitter_translation = 0.02;
  double step_angle = 5.0 * std::numbers::pi / 180.0;
  double step_z = 0.01;
  double min_step_angle = 0.25 * std::numbers::pi / 180.0;
  double min_step_z = 5e-4;
  std::size_t max_evaluations = 120;  ///< per seed
  unsigned threads = 1;

  void validate() const;
};

struct PipelineResult {
  std::vector<PlacementCandidate> placements;
  std::size_t proposed = 0;
  std::size_t stage1_kept = 0;
  std::size_t refined = 0;
  bool empty_warning = false;
};

/// Reads a JSON array of [dx, dy, dz, da, db, dg] records.
std::vector<Pose6D> read_pose_file(const std::filesystem::path& path);

PlacementCandidate score_candidate(const StabilityOracle& oracle, const Pose6D& delta, int stage);

std::vector<PlacementCandidate> propose_stage1(const StabilityOracle& oracle,
                                               const SegmentedScene& scene,
                                               const SamplerConfig& cfg, unsigned threads = 1);

/// Drops failed candidates and those scoring below s_min, sorts the rest by
/// score (stable, so earlier candidates win ties) and removes near duplicates.
std::vector<PlacementCandidate> filter_candidates(std::vector<PlacementCandidate> cands,
                                                  double s_min, double delta,
                                                  const DiversityMetric& metric);

/// Jittered copies of `cand` (copy 0 unjittered), each improved by coordinate
/// ascent on the score and snapped to its settled pose when that scores no
/// worse.
std::vector<PlacementCandidate> refine_stage2(const StabilityOracle& oracle,
                                              const PlacementCandidate& cand,
                                              const PipelineParams& params, std::uint64_t seed);

PipelineResult generate_placements(const SegmentedScene& scene, const SamplerConfig& cfg,
                                   const PipelineParams& params,
                                   const StabilityParams& stability = {});

/// Diversity metric for a scene: 64-point subsample of the initial object and
/// the diameter of the canonical support cloud.
DiversityMetric scene_diversity_metric(const SegmentedScene& scene);

}  // namespace reorient
