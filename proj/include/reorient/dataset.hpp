#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "reorient/metrics.hpp"
#include "reorient/scene.hpp"
#include "reorient/stability.hpp"

namespace reorient {

enum class ObjectKind { Box, Rod, Plate, LShape };
enum class SupportKind { Tray, SlottedHolder, Beaker, Box };

std::string_view object_kind_name(ObjectKind k);
std::string_view support_kind_name(SupportKind k);
ObjectKind object_kind_from_name(std::string_view s);
SupportKind support_kind_from_name(std::string_view s);

/// Object dimensions by kind:
///   box, plate: size = (x, y, z) extents;
///   rod: cylinder along x, size = (length, diameter, diameter);
///   L-shape: size = bounding extents, `thickness` = leg thickness.
struct ObjectSpec {
  ObjectKind kind = ObjectKind::Box;
  Vec3 size{0.05, 0.05, 0.05};
  double thickness = 0.01;
};

/// Support dimensions by kind (size = outer x, y, z extents):
///   tray: walls of thickness `wall` on a floor of thickness `floor`;
///   slotted_holder: block with a slot of width `slot` along y, `floor` below it;
///   beaker: cylinder of diameter size.x and height size.z, `wall` thick
///   side, `floor` thick bottom;
///   box: solid block.
struct SupportSpec {
  SupportKind kind = SupportKind::Tray;
  Vec3 size{0.2, 0.3, 0.05};
  double wall = 0.01;
  double floor = 0.01;
  double slot = 0.02;
};

struct PrimitivePairSpec {
  std::string id = "pair";
  ObjectSpec object;
  SupportSpec support;
  double object_density = 4e5;   ///< points / m^2
  double support_density = 1.6e5;
  double table_density = 2e3;

  /// Throws BadSpec.
  void validate() const;
};

void to_json(nlohmann::json& j, const PrimitivePairSpec& s);
void from_json(const nlohmann::json& j, PrimitivePairSpec& s);

struct PrimitivePair {
  PointList object;   ///< object frame: footprint centered at the origin, bottom at z = 0
  PointList support;  ///< support frame: bottom at z = 0, AABB centered on the z axis
};

/// Surface samples of the two compositions. Throws BadSpec.
PrimitivePair make_primitive_pair(const PrimitivePairSpec& spec, std::uint64_t seed);

double surface_area(const ObjectSpec& spec);

/// Raw scene: the support at the origin, the object resting on the table in
/// the ring 1-2 object diameters from the support AABB, and a table patch.
RawScene compose_scene(const PrimitivePairSpec& spec, const PrimitivePair& pair, std::uint64_t seed);

/// Free drops from random orientations over the support footprint; returns the
/// distinct stable pose deltas (w.r.t. the scene's initial object).
std::vector<Pose6D> drop_trials(const StabilityOracle& oracle, const SegmentedScene& scene,
                                std::size_t n, std::uint64_t seed, double delta2 = 0.02,
                                unsigned threads = 1);

struct DatasetSample {
  std::string scene_id;
  Pose6D pose;
  Category label = Category::Separation;
};

struct SweepParams {
  double dt = 0.01;
  double dtheta = 5.0 * std::numbers::pi / 180.0;
  int k = 6;
};

/// The stable pose itself followed by +-{1..k} steps along each world axis
/// and rotations about the centroid around each world and object axis.
std::vector<Pose6D> variation_poses(const StabilityOracle& oracle, const Pose6D& stable,
                                    const SweepParams& params = {});

/// Labels every variation pose; poses whose classification throws are skipped.
std::vector<DatasetSample> variation_sweep(const StabilityOracle& oracle, const Pose6D& stable,
                                           const std::string& scene_id,
                                           const SweepParams& params = {}, unsigned threads = 1);

/// Object resting on the table, non-colliding, within the 1-2 diameter ring.
std::vector<Pose6D> initial_table_poses(const StabilityOracle& oracle, const SegmentedScene& scene,
                                        std::size_t n, std::uint64_t seed);

struct GroundTruthSets {
  PoseSet t_gt1;
  PoseSet t_gt2;
};

/// World-frame delta taking the object from pose `from` to pose `to`.
Pose6D relative_delta(const Pose6D& from, const Pose6D& to);

GroundTruthSets ground_truth(const std::vector<Pose6D>& initial, const std::vector<DatasetSample>& samples,
                             const std::vector<Pose6D>& stable);

struct DatasetParams {
  std::size_t n_drop = 50;
  std::size_t n_init = 5;
  std::uint64_t seed = 0;
  SweepParams sweep;
  StabilityParams stability;
  unsigned threads = 1;
};

/// Writes out_dir/<id>/{scene.pts, poses.jsonl, gt.json} per pair and
/// out_dir/manifest.json. Errors in one pair are recorded in the manifest and
/// do not stop the others; an unwritable out_dir throws IoError.
nlohmann::json build_dataset(const std::vector<PrimitivePairSpec>& pairs,
                             const std::filesystem::path& out_dir, const DatasetParams& params);

/// Same as build_dataset, starting from existing scene files (one per pair).
nlohmann::json build_dataset_from_scenes(
    const std::vector<std::pair<std::string, std::filesystem::path>>& scenes,
    const std::filesystem::path& out_dir, const DatasetParams& params);

}  // namespace reorient
