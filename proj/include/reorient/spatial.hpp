#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reorient/scene.hpp"

namespace reorient {

/// Uniform grid over a fixed point set for radius and box queries. Cells are
/// stored densely over the points' bounding box (CSR layout).
class PointHash {
 public:
  PointHash() = default;
  PointHash(std::span<const Vec3> points, double cell);

  bool empty() const { return points_.empty(); }
  const PointList& points() const { return points_; }

  /// Index of the nearest point within `radius` of `q`, if any. Ties go to
  /// the lower index.
  std::optional<std::size_t> nearest_within(const Vec3& q, double radius) const;
  bool any_within(const Vec3& q, double radius) const;

  /// Calls `fn(index)` for every point inside the closed box [lo, hi].
  template <typename Fn>
  void for_each_in_box(const Vec3& lo, const Vec3& hi, Fn&& fn) const {
    std::array<int, 3> a, b;
    if (!cell_range(lo, hi, a, b)) return;
    for (int z = a[2]; z <= b[2]; ++z)
      for (int y = a[1]; y <= b[1]; ++y) {
        const std::size_t row = (static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0];
        for (std::uint32_t k = start_[row + a[0]]; k < start_[row + b[0] + 1]; ++k) {
          const Vec3& p = sorted_[k];
          if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) fn(order_[k]);
        }
      }
  }

  /// True when `pred(index)` holds for some point inside the closed box
  /// [lo, hi]; stops at the first hit.
  template <typename Pred>
  bool any_in_box(const Vec3& lo, const Vec3& hi, Pred&& pred) const {
    std::array<int, 3> a, b;
    if (!cell_range(lo, hi, a, b)) return false;
    for (int z = a[2]; z <= b[2]; ++z)
      for (int y = a[1]; y <= b[1]; ++y) {
        const std::size_t row = (static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0];
        for (std::uint32_t k = start_[row + a[0]]; k < start_[row + b[0] + 1]; ++k) {
          const Vec3& p = sorted_[k];
          if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all() && pred(order_[k]))
            return true;
        }
      }
    return false;
  }

 private:
  bool cell_range(const Vec3& lo, const Vec3& hi, std::array<int, 3>& a,
                  std::array<int, 3>& b) const;

  PointList points_;
  PointList sorted_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> start_;
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  std::array<int, 3> dims_{0, 0, 0};
};

}  // namespace reorient
