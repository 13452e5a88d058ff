#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "reorient/scene.hpp"
#include "reorient/spatial.hpp"

namespace reorient {

struct Box {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

/// Parallel-jaw gripper. Gripper frame: origin midway between the contacts,
/// x along the closing axis, z along the approach direction, y = z cross x.
/// Fingers hang from the palm along +z and reach `clearance` past the
/// contacts.
struct GripperModel {
  double max_opening = 0.08;
  double finger_length = 0.05;
  double finger_thickness = 0.01;
  double finger_width = 0.02;
  double palm_depth = 0.03;
  /// Free space kept around each contact.
  double clearance = 0.005;

  /// Throws BadConfig.
  void validate() const;

  /// Two finger boxes and the palm for a grasp of `width` with the jaw open
  /// to `opening` (finger boxes cover the closing sweep).
  std::array<Box, 3> boxes(double width, double opening) const;
};

struct WorkspacePredicate {
  Vec3 base{-0.5, 0.0, 0.0};
  double r_min = 0.2;
  double r_max = 1.1;
  /// Lowest allowed elevation of the wrist above the grasp, radians.
  double min_elevation = 0.0;
  /// Height above a grasp that must also be reachable for approach and retreat.
  double lift = 0.10;

  /// Throws BadConfig.
  void validate() const;

  bool reachable(const Vec3& origin, const Vec3& approach) const;
  /// reachable() at the grasp and at the grasp raised by lift.
  bool reachable_lifted(const Vec3& origin, const Vec3& approach) const;
};

/// Contact indices into the object cloud, approach direction (world frame at
/// one node) and opening width.
struct GraspConfiguration {
  std::size_t ix = 0;
  std::size_t iy = 0;
  Vec3 d = Vec3::Zero();
  double width = 0.0;

  bool operator==(const GraspConfiguration&) const = default;
};

enum class GraspReject { None, ApproachFromBelow, Collision, Unreachable };

std::string_view grasp_reject_name(GraspReject r);

/// Angle between `force` and the inward normal -`normal` is within atan(f).
bool in_friction_cone(const Vec3& force, const Vec3& normal, double f);

/// Two-contact force closure: the line qx -> qy lies in both friction cones.
bool force_closure(const Vec3& qx, const Vec3& nx, const Vec3& qy, const Vec3& ny, double f);

/// Force-closure pairs (ix < iy) no wider than max_opening - 2 clearance,
/// reduced to `max_pairs` by farthest point sampling over the concatenated
/// contact coordinates. Directions are left zero. Throws NoNormals when the
/// normals do not match the points.
std::vector<GraspConfiguration> antipodal_pairs(std::span<const Vec3> points,
                                                std::span<const Vec3> normals,
                                                const GripperModel& gripper, double f,
                                                std::size_t max_pairs);

/// Gripper-to-world transform of `g` on the posed object cloud.
RigidTransform grasp_frame(const GraspConfiguration& g, std::span<const Vec3> object);

/// Static surroundings for collision checks: support points and a table plane.
class GraspScene {
 public:
  GraspScene() = default;
  GraspScene(std::span<const Vec3> static_points, double table_z, double cell = 0.01);

  static GraspScene from_scene(const SegmentedScene& scene);

  double table_z() const { return table_z_; }
  const Vec3& table_normal() const { return normal_; }
  const PointHash& points() const { return hash_; }

  /// Any static point or the table half-space inside the box posed by `T`.
  bool box_collides(const Box& box, const RigidTransform& T) const;

 private:
  PointHash hash_;
  double table_z_ = 0.0;
  Vec3 normal_ = Vec3::UnitZ();
};

/// Object points inside the box posed by `T`, ignoring points within
/// `clearance` of either contact.
bool object_in_box(const Box& box, const RigidTransform& T, std::span<const Vec3> object,
                   const Vec3& qx, const Vec3& qy, double clearance);

GraspReject grasp_feasible(const GraspConfiguration& g, std::span<const Vec3> object,
                           const GraspScene& scene, const GripperModel& gripper,
                           const WorkspacePredicate& workspace);

/// Grasp at node j from the grasp at node i, with R_j_i = R_j R_i^T: the
/// direction becomes R_j_i d, indices and width are kept.
GraspConfiguration transfer_grasp(const GraspConfiguration& g, const Mat3& R_j_i);

struct GraspParams {
  GripperModel gripper;
  WorkspacePredicate workspace;
  double friction = 0.5;
  std::size_t k_dirs = 16;
  std::size_t max_pairs = 64;
  std::size_t normal_k = 16;

  /// Throws BadConfig.
  void validate() const;
};

/// Grasp candidates on one object, checked at object poses given as rigid
/// transforms of the initial object cloud. Approach directions are fixed in
/// the object frame: for each antipodal seed, k_dirs evenly spaced directions
/// on the circle orthogonal to the closing axis, starting from the one
/// closest to straight down in the initial pose.
class GraspPlanner {
 public:
  GraspPlanner(PointList object, const GraspScene& scene, const GraspParams& params);

  const PointList& object() const { return object_; }
  const PointList& normals() const { return normals_; }
  const std::vector<GraspConfiguration>& seeds() const { return seeds_; }
  std::size_t candidate_count() const { return seeds_.size() * params_.k_dirs; }

  /// Candidate `c` expressed at the pose `T`.
  GraspConfiguration candidate(std::size_t c, const RigidTransform& T) const;

  /// Feasibility of every candidate at the pose `T`.
  std::vector<char> feasibility(const RigidTransform& T) const;

  /// Candidates feasible under both masks, expressed at pose `Ti`.
  std::vector<GraspConfiguration> shared(const std::vector<char>& mask_i, const RigidTransform& Ti,
                                         const std::vector<char>& mask_j) const;

 private:
  PointList object_;
  PointList normals_;
  const GraspScene* scene_;
  GraspParams params_;
  std::vector<GraspConfiguration> seeds_;
  std::vector<Vec3> directions_;  ///< object frame, seed-major
};

/// Grasps feasible at both object poses `Ti` and `Tj` (transforms of the
/// initial object cloud `object`), expressed at `Ti`.
std::vector<GraspConfiguration> shared_grasps(const RigidTransform& Ti, const RigidTransform& Tj,
                                              std::span<const Vec3> object, const GraspScene& scene,
                                              const GraspParams& params);

}  // namespace reorient
