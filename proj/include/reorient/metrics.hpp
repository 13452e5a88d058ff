#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "reorient/scene.hpp"

namespace reorient {

using CoordSet = std::vector<Eigen::VectorXd>;

/// Chamfer distance: sum of squared nearest-neighbour distances in both
/// directions. Throws EmptySet / DimensionMismatch.
double chamfer(const CoordSet& a, const CoordSet& b, int dim);

/// A set of poses viewed as coordinate point sets.
class PoseSet {
 public:
  PoseSet() = default;
  explicit PoseSet(std::vector<Pose6D> poses) : poses_(std::move(poses)) {}

  const std::vector<Pose6D>& poses() const { return poses_; }
  bool empty() const { return poses_.empty(); }
  std::size_t size() const { return poses_.size(); }
  void push_back(const Pose6D& p) { poses_.push_back(p); }

  CoordSet translations() const;
  CoordSet orientations() const;
  /// [dx, dy, dz, w_o*da, w_o*db, w_o*dg]
  CoordSet coords6(double orientation_weight = 1.0) const;

 private:
  std::vector<Pose6D> poses_;
};

/// Stage 1: translation chamfer + 6D chamfer. Stage 2: orientation chamfer +
/// 6D chamfer. `orientation_weight` scales the angle coordinates of the 6D term.
double stage_loss(const PoseSet& pred, const PoseSet& gt, int stage,
                  double orientation_weight = 1.0);

/// Two-class cross-entropy -x[l] + log(exp(x0) + exp(x1)), overflow safe.
double cross_entropy(const std::array<double, 2>& x, int label);

/// Earth mover's distance between equal-size clouds with linear Euclidean
/// ground distance, solved exactly by optimal assignment.
double emd(std::span<const Vec3> a, std::span<const Vec3> b);

inline constexpr std::size_t kDiversitySubsample = 64;

/// d = emd(pq1, pq2) / (n_obj * L). Clouds larger than 64 points are reduced
/// to the same 64 indices first: `subsample` when given, otherwise farthest
/// point sampling of the pointwise midpoint cloud (symmetric in the inputs).
double diversity_distance(std::span<const Vec3> pq1, std::span<const Vec3> pq2, std::size_t n_obj,
                          double L, std::span<const std::size_t> subsample = {});

/// Diversity distance bound to one object: fixed subsample indices (FPS on the
/// initial object cloud) and support diameter.
class DiversityMetric {
 public:
  DiversityMetric(std::span<const Vec3> initial_object, double support_diameter,
                  std::size_t max_points = kDiversitySubsample);

  double distance(std::span<const Vec3> a, std::span<const Vec3> b) const;
  /// distance(a, b) > delta, deciding by cheap bounds before the exact EMD.
  bool exceeds(std::span<const Vec3> a, std::span<const Vec3> b, double delta) const;

  const std::vector<std::size_t>& indices() const { return indices_; }
  double support_diameter() const { return L_; }

 private:
  PointList pick(std::span<const Vec3> cloud) const;

  std::vector<std::size_t> indices_;
  std::size_t n_obj_ = 0;
  double L_ = 0.0;
};

/// Greedy diversity filter over clouds already sorted by descending score:
/// keeps a cloud iff it exceeds `delta` to every cloud kept so far. Returns the
/// kept positions in input order.
std::vector<std::size_t> dedup_filter(std::span<const PointList> clouds, double delta,
                                      const DiversityMetric& metric);

}  // namespace reorient
