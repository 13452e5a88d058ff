#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace reorient {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointList = std::vector<Vec3>;

inline constexpr std::size_t kDefaultSceneSize = 2048;

enum class Label : std::uint8_t { Object = 0, Support = 1, Table = 2 };

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// 6-DOF pose: translation in meters plus fixed-axis X-Y-Z Euler angles
/// (roll about world x, then pitch about world y, then yaw about world z).
class Pose6D {
 public:
  Pose6D() = default;
  /// Throws ParseError on non-finite components. Angles are wrapped.
  Pose6D(const Vec3& translation, const Vec3& euler);

  static Pose6D from_array(std::span<const double> v);

  const Vec3& translation() const { return t_; }
  const Vec3& euler() const { return o_; }
  std::array<double, 6> to_array() const;

  bool operator==(const Pose6D& other) const = default;

 private:
  Vec3 t_ = Vec3::Zero();
  Vec3 o_ = Vec3::Zero();
};

struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }
  /// (*this) after `rhs`: x -> R (rhs.R x + rhs.t) + t.
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {R * rhs.R, R * rhs.t + t};
  }
};

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);

RigidTransform pose_to_transform(const Pose6D& p);
Pose6D transform_to_pose(const RigidTransform& T);
PointList transform_cloud(std::span<const Vec3> points, const RigidTransform& T);

Vec3 centroid(std::span<const Vec3> points);

struct RelativeRotation {
  Mat3 R_j_i;
  double angle;
};

/// R_j_i = R_j * R_i^T and its geodesic angle in [0, pi].
RelativeRotation relative_rotation(const RigidTransform& T_i, const RigidTransform& T_j);
double rotation_angle(const Mat3& R);

/// Greedy farthest point sampling. The first pick is the point nearest the
/// centroid; every later pick maximizes the distance to the chosen set, ties
/// going to the lowest index.
std::vector<std::size_t> farthest_point_indices(std::span<const Vec3> points, std::size_t k);
PointList farthest_point_sample(std::span<const Vec3> points, std::size_t k);

/// Unit normals from the smallest-eigenvalue direction of each point's k-NN
/// covariance, flipped to point away from the cloud centroid.
PointList estimate_normals(std::span<const Vec3> points, std::size_t k);

double support_diameter(std::span<const Vec3> support_points);

/// Labeled scene in the support-bottom frame (origin at the support's bottom
/// center, z up). `object`, `support` and `table` hold the canonical resampled
/// cloud; `support_detail` keeps the full-resolution support geometry used by
/// the geometric oracles.
class SegmentedScene {
 public:
  SegmentedScene() = default;

  /// Resamples the raw clouds to `size` points with per-label proportional
  /// quotas. Throws EmptyClass when object or support is empty.
  static SegmentedScene from_clouds(PointList object, PointList support, PointList table,
                                    std::size_t size = kDefaultSceneSize);

  const PointList& object() const { return object_; }
  const PointList& support() const { return support_; }
  const PointList& table() const { return table_; }
  const PointList& support_detail() const { return support_detail_; }

  std::size_t size() const { return object_.size() + support_.size() + table_.size(); }
  PointList points() const;
  std::vector<Label> labels() const;

  /// Height of the table plane (median table z; 0 when no table points).
  double table_z() const { return table_z_; }

  static constexpr const char* kFrame = "support_bottom";

 private:
  PointList object_;
  PointList support_;
  PointList table_;
  PointList support_detail_;
  double table_z_ = 0.0;
};

/// Raw per-label clouds as stored in a `.pts` file.
struct RawScene {
  PointList object;
  PointList support;
  PointList table;
};

RawScene read_pts(const std::filesystem::path& path);
void write_pts(const std::filesystem::path& path, const RawScene& raw);

/// Reads a `.pts` file, re-expresses it in the support-bottom frame and
/// resamples it to `size` points.
SegmentedScene load_scene(const std::filesystem::path& path,
                          std::size_t size = kDefaultSceneSize);

/// Shifts all clouds so the support AABB bottom center is the origin.
RawScene to_support_frame(RawScene raw);

}  // namespace reorient
