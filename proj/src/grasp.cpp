#include "reorient/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reorient/error.hpp"

namespace reorient {

namespace {

// Directions within rounding of the table plane are made exactly horizontal.
Vec3 snap_direction(Vec3 d) {
  if (std::abs(d.z()) <= 1e-12) {
    d.z() = 0.0;
    d.normalize();
  }
  return d;
}

}  // namespace

void GripperModel::validate() const {
  const bool ok = max_opening > 0.0 && finger_length > 0.0 && finger_thickness > 0.0 &&
                  finger_width > 0.0 && palm_depth > 0.0 && clearance >= 0.0 &&
                  2.0 * clearance < max_opening;
  if (!ok) throw Error(ErrorCode::BadConfig, "gripper dimensions must be positive");
}

std::array<Box, 3> GripperModel::boxes(double width, double opening) const {
  const double inner = 0.5 * width + clearance;
  const double outer = std::max(0.5 * std::max(opening, width) + finger_thickness, inner);
  const double hw = 0.5 * finger_width;
  const double tip = clearance;
  return {Box{Vec3(inner, -hw, -finger_length), Vec3(outer, hw, tip)},
          Box{Vec3(-outer, -hw, -finger_length), Vec3(-inner, hw, tip)},
          Box{Vec3(-outer, -hw, -finger_length - palm_depth), Vec3(outer, hw, -finger_length)}};
}

void WorkspacePredicate::validate() const {
  if (!(r_min > 0.0 && r_min < r_max) || !base.allFinite() || !std::isfinite(min_elevation)) {
    throw Error(ErrorCode::BadConfig, "workspace needs 0 < r_min < r_max");
  }
  if (!(lift >= 0.0)) throw Error(ErrorCode::BadConfig, "workspace lift must be non-negative");
}

bool WorkspacePredicate::reachable(const Vec3& origin, const Vec3& approach) const {
  const double r = (origin - base).norm();
  if (r < r_min || r > r_max) return false;
  const double elevation = std::asin(std::clamp(-approach.z(), -1.0, 1.0));
  return elevation >= min_elevation - 1e-12;
}

bool WorkspacePredicate::reachable_lifted(const Vec3& origin, const Vec3& approach) const {
  return reachable(origin, approach) && reachable(origin + lift * Vec3::UnitZ(), approach);
}

std::string_view grasp_reject_name(GraspReject r) {
  switch (r) {
    case GraspReject::None: return "none";
    case GraspReject::ApproachFromBelow: return "approach_from_below";
    case GraspReject::Collision: return "collision";
    case GraspReject::Unreachable: return "unreachable";
  }
  return "unknown";
}

bool in_friction_cone(const Vec3& force, const Vec3& normal, double f) {
  const double angle = std::atan2(force.cross(normal).norm(), -force.dot(normal));
  return angle <= std::atan(f);
}

bool force_closure(const Vec3& qx, const Vec3& nx, const Vec3& qy, const Vec3& ny, double f) {
  const Vec3 line = (qy - qx).normalized();
  return in_friction_cone(line, nx, f) && in_friction_cone(-line, ny, f);
}

std::vector<GraspConfiguration> antipodal_pairs(std::span<const Vec3> points,
                                                std::span<const Vec3> normals,
                                                const GripperModel& gripper, double f,
                                                std::size_t max_pairs) {
  if (normals.empty() || normals.size() != points.size()) {
    throw Error(ErrorCode::NoNormals, "antipodal sampling needs one normal per point");
  }
  if (!(f > 0.0)) throw Error(ErrorCode::BadConfig, "friction coefficient must be positive");
  const double max_width = gripper.max_opening - 2.0 * gripper.clearance;
  std::vector<GraspConfiguration> pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double w = (points[j] - points[i]).norm();
      if (w < 1e-9 || w > max_width) continue;
      if (!force_closure(points[i], normals[i], points[j], normals[j], f)) continue;
      pairs.push_back({i, j, Vec3::Zero(), w});
    }
  }
  if (pairs.size() <= max_pairs) return pairs;

  using Vec6 = Eigen::Matrix<double, 6, 1>;
  std::vector<Vec6> desc(pairs.size());
  Vec6 mean = Vec6::Zero();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    desc[k] << points[pairs[k].ix], points[pairs[k].iy];
    mean += desc[k];
  }
  mean /= static_cast<double>(pairs.size());
  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < desc.size(); ++k) {
    const double d = (desc[k] - mean).squaredNorm();
    if (d < best) {
      best = d;
      first = k;
    }
  }
  std::vector<double> dist(desc.size(), std::numeric_limits<double>::infinity());
  std::vector<GraspConfiguration> out;
  std::size_t pick = first;
  for (std::size_t m = 0; m < max_pairs; ++m) {
    out.push_back(pairs[pick]);
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t k = 0; k < desc.size(); ++k) {
      dist[k] = std::min(dist[k], (desc[k] - desc[pick]).squaredNorm());
      if (dist[k] > far) {
        far = dist[k];
        next = k;
      }
    }
    pick = next;
  }
  return out;
}

RigidTransform grasp_frame(const GraspConfiguration& g, std::span<const Vec3> object) {
  const Vec3& qx = object[g.ix];
  const Vec3& qy = object[g.iy];
  const Vec3 x = (qy - qx).normalized();
  const Vec3 z = (g.d - g.d.dot(x) * x).normalized();
  RigidTransform T;
  T.R.col(0) = x;
  T.R.col(1) = z.cross(x);
  T.R.col(2) = z;
  T.t = 0.5 * (qx + qy);
  return T;
}

GraspScene::GraspScene(std::span<const Vec3> static_points, double table_z, double cell)
    : hash_(static_points, cell), table_z_(table_z) {}

GraspScene GraspScene::from_scene(const SegmentedScene& scene) {
  const PointList& pts = scene.support_detail().empty() ? scene.support() : scene.support_detail();
  return GraspScene(pts, scene.table_z());
}

bool GraspScene::box_collides(const Box& box, const RigidTransform& T) const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? box.hi.x() : box.lo.x(), (c & 2) ? box.hi.y() : box.lo.y(),
                      (c & 4) ? box.hi.z() : box.lo.z());
    const Vec3 w = T.apply(corner);
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  if (lo.z() < table_z_ - 1e-9) return true;
  if (hash_.empty()) return false;
  const Mat3 Rt = T.R.transpose();
  return hash_.any_in_box(lo, hi, [&](std::size_t i) {
    return box.contains(Rt * (hash_.points()[i] - T.t));
  });
}

bool object_in_box(const Box& box, const RigidTransform& T, std::span<const Vec3> object,
                   const Vec3& qx, const Vec3& qy, double clearance) {
  const Mat3 Rt = T.R.transpose();
  const double c2 = clearance * clearance;
  for (const Vec3& p : object) {
    if ((p - qx).squaredNorm() <= c2 || (p - qy).squaredNorm() <= c2) continue;
    if (box.contains(Rt * (p - T.t))) return true;
  }
  return false;
}

GraspReject grasp_feasible(const GraspConfiguration& g, std::span<const Vec3> object,
                           const GraspScene& scene, const GripperModel& gripper,
                           const WorkspacePredicate& workspace) {
  if (g.d.dot(scene.table_normal()) > 1e-12) return GraspReject::ApproachFromBelow;
  const RigidTransform T = grasp_frame(g, object);
  if (!workspace.reachable_lifted(T.t, g.d)) return GraspReject::Unreachable;
  for (const Box& box : gripper.boxes(g.width, gripper.max_opening)) {
    if (scene.box_collides(box, T) ||
        object_in_box(box, T, object, object[g.ix], object[g.iy], gripper.clearance)) {
      return GraspReject::Collision;
    }
  }
  return GraspReject::None;
}

GraspConfiguration transfer_grasp(const GraspConfiguration& g, const Mat3& R_j_i) {
  GraspConfiguration out = g;
  out.d = snap_direction(R_j_i * g.d);
  return out;
}

void GraspParams::validate() const {
  gripper.validate();
  workspace.validate();
  if (!(friction > 0.0) || k_dirs == 0 || max_pairs == 0 || normal_k < 3) {
    throw Error(ErrorCode::BadConfig, "grasp parameters out of range");
  }
}

GraspPlanner::GraspPlanner(PointList object, const GraspScene& scene, const GraspParams& params)
    : object_(std::move(object)), scene_(&scene), params_(params) {
  params_.validate();
  normals_ = estimate_normals(object_, std::min(params_.normal_k, object_.size()));
  seeds_ = antipodal_pairs(object_, normals_, params_.gripper, params_.friction, params_.max_pairs);
  const double K = static_cast<double>(params_.k_dirs);
  directions_.reserve(seeds_.size() * params_.k_dirs);
  for (const auto& s : seeds_) {
    const Vec3 a = (object_[s.iy] - object_[s.ix]).normalized();
    Vec3 u = -Vec3::UnitZ() + a.z() * a;
    if (u.norm() < 1e-6) u = Vec3::UnitX() - a.x() * a;
    u.normalize();
    const Vec3 v = a.cross(u);
    for (std::size_t k = 0; k < params_.k_dirs; ++k) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / K;
      directions_.push_back(std::cos(phi) * u + std::sin(phi) * v);
    }
  }
}

GraspConfiguration GraspPlanner::candidate(std::size_t c, const RigidTransform& T) const {
  GraspConfiguration g = seeds_[c / params_.k_dirs];
  g.d = snap_direction(T.R * directions_[c]);
  return g;
}

std::vector<char> GraspPlanner::feasibility(const RigidTransform& T) const {
  const PointList posed = transform_cloud(object_, T);
  std::vector<char> mask(candidate_count(), 0);
  for (std::size_t c = 0; c < mask.size(); ++c) {
    mask[c] = grasp_feasible(candidate(c, T), posed, *scene_, params_.gripper,
                             params_.workspace) == GraspReject::None;
  }
  return mask;
}

std::vector<GraspConfiguration> GraspPlanner::shared(const std::vector<char>& mask_i,
                                                     const RigidTransform& Ti,
                                                     const std::vector<char>& mask_j) const {
  std::vector<GraspConfiguration> out;
  for (std::size_t c = 0; c < candidate_count(); ++c) {
    if (mask_i[c] && mask_j[c]) out.push_back(candidate(c, Ti));
  }
  return out;
}

std::vector<GraspConfiguration> shared_grasps(const RigidTransform& Ti, const RigidTransform& Tj,
                                              std::span<const Vec3> object, const GraspScene& scene,
                                              const GraspParams& params) {
  const GraspPlanner planner(PointList(object.begin(), object.end()), scene, params);
  return planner.shared(planner.feasibility(Ti), Ti, planner.feasibility(Tj));
}

}  // namespace reorient
