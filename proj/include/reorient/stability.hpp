#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "reorient/scene.hpp"
#include "reorient/spatial.hpp"

namespace reorient {

enum class VoxelState : std::uint8_t { Free = 0, Shell = 1, Interior = 2 };

/// Voxelized support: shell voxels hold at least one support point; interior
/// voxels are the free voxels unreachable from the grid boundary through free
/// voxels (6-connectivity).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  double voxel() const { return voxel_; }
  const Vec3& origin() const { return origin_; }
  const std::array<int, 3>& dims() const { return dims_; }

  VoxelState state_at(const Vec3& p) const;
  VoxelState state(int x, int y, int z) const;
  Vec3 center(int x, int y, int z) const;
  bool cell_of(const Vec3& p, std::array<int, 3>& cell) const;

  std::size_t count(VoxelState s) const;

 private:
  friend OccupancyGrid build_occupancy(std::span<const Vec3>, double);

  std::size_t flat(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0] + x;
  }

  double voxel_ = 0.0;
  Vec3 origin_ = Vec3::Zero();
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<VoxelState> cells_;
};

/// Grid over the support AABB plus a two-voxel margin. Throws TooFewPoints
/// (< 8 points) and BadVoxel (voxel <= 0 or > diameter / 4).
OccupancyGrid build_occupancy(std::span<const Vec3> support_points, double voxel);

struct PenetrationReport {
  double fraction = 0.0;
  double max_depth = 0.0;
};

PenetrationReport penetration_report(std::span<const Vec3> object_points,
                                     const OccupancyGrid& grid);

struct ContactReport {
  std::vector<std::size_t> contacts;  ///< indices into the object cloud
  PointList witnesses;                ///< contact location on the support or table
  double margin = -std::numeric_limits<double>::infinity();
  bool afforded_by_support = false;
};

struct ScoreWeights {
  double alpha = 0.5;  ///< stability weight
  double beta = 0.5;   ///< penetration weight
  void validate() const;
};

struct StabilityParams {
  double voxel = 0.005;
  double contact_tol = 0.01;
  double pen_tol = 0.005;
  double pen_ref = 0.05;
  double margin_ref = 0.05;
  double max_pen = 0.02;
  double settle_eps = 1e-5;
  int settle_max_iter = 2000;
  double settle_dtheta = std::numbers::pi / 180.0;
  /// Step halvings tried once full-size moves stop descending.
  int settle_refinements = 3;
  double stable_offset = 0.01;
  double stable_rotation = 10.0 * std::numbers::pi / 180.0;
  /// The classification probe stops once the motion exceeds these multiples
  /// of the stability thresholds (drop or rotation); the outcome is then
  /// unstable regardless and the settle factor is below exp(-multiple).
  double probe_limit = 3.0;
  ScoreWeights weights;

  double settle_dz() const { return voxel / 2.0; }
  void validate() const;
};

/// Margin of the object's centroid over the contact polygon. Support contacts
/// are located at their nearest support point; table contacts at their
/// projection on the plane.
ContactReport support_margin(std::span<const Vec3> object_points,
                             std::span<const Vec3> support_points, double table_z,
                             double contact_tol);

enum class Category : std::uint8_t { Stable, Separation, Penetration, UnstableContact };

std::string_view category_name(Category c);
Category category_from_name(std::string_view s);

struct StabilityReport {
  Category category = Category::Separation;
  double s_pen = 0.0;
  double s_stab = 0.0;
  double score = 0.0;
  double displacement = 0.0;
  double rotation = 0.0;
  double penetration = 0.0;
  double margin = -std::numeric_limits<double>::infinity();
  bool afforded_by_support = false;
  std::size_t contact_count = 0;
};

struct SettleResult {
  Pose6D settled;
  RigidTransform transform;
  double displacement = 0.0;  ///< centroid offset (m)
  double rotation = 0.0;      ///< geodesic angle (rad)
  int iterations = 0;
  bool truncated = false;  ///< stopped early by a probe limit
  std::vector<double> heights;  ///< centroid height after each accepted move
};

/// Precomputed geometry for one scene: support occupancy, support contact
/// hash, table height and the initial object cloud. Immutable once built.
class StabilityOracle {
 public:
  StabilityOracle(const SegmentedScene& scene, const StabilityParams& params);

  const StabilityParams& params() const { return params_; }
  const OccupancyGrid& grid() const { return grid_; }
  const PointList& object() const { return object_; }
  double table_z() const { return table_z_; }

  /// Object at the given pose delta.
  PointList place(const Pose6D& delta) const;

  /// Support-interior or below-table test for one point.
  bool penetrates(const Vec3& p) const;
  /// Share of points that penetrate the support interior or the table.
  double penetration_fraction(std::span<const Vec3> pts) const;
  ContactReport contacts(std::span<const Vec3> pts) const;

  /// Quasi-static settle from `delta`. Throws InitialPenetration when the
  /// starting penetration exceeds max_pen and NoConvergence when the budget
  /// runs out while the centroid is still descending.
  SettleResult settle(const Pose6D& delta) const;
  SettleResult settle(const RigidTransform& start) const;
  /// Settle that gives up once the drop exceeds probe_limit * stable_offset
  /// or the rotation exceeds probe_limit * stable_rotation.
  SettleResult settle_probe(const Pose6D& delta) const;

  StabilityReport classify(const Pose6D& delta) const;

 private:
  SettleResult run_settle(const RigidTransform& start, bool probe) const;

  StabilityParams params_;
  OccupancyGrid grid_;
  PointHash support_hash_;
  PointList object_;
  double table_z_ = 0.0;
};

SettleResult settle(const SegmentedScene& scene, const Pose6D& pose, const StabilityParams& params);

StabilityReport classify_and_score(const SegmentedScene& scene, const Pose6D& pose,
                                   const ScoreWeights& weights, const StabilityParams& params);

}  // namespace reorient
