#include "reorient/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reorient {

namespace {

constexpr double kMaxCells = 8e6;

}  // namespace

PointHash::PointHash(std::span<const Vec3> points, double cell)
    : points_(points.begin(), points.end()), cell_(cell) {
  if (points_.empty()) return;
  Vec3 lo = points_.front(), hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 ext = hi - lo;
  auto cells_for = [&](double c) {
    return (std::floor(ext.x() / c) + 1) * (std::floor(ext.y() / c) + 1) *
           (std::floor(ext.z() / c) + 1);
  };
  while (cells_for(cell_) > kMaxCells) cell_ *= 2.0;
  origin_ = lo;
  for (int a = 0; a < 3; ++a) dims_[a] = static_cast<int>(std::floor(ext[a] / cell_)) + 1;

  const std::size_t ncells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<std::uint32_t> flat(points_.size());
  start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) {
      c[a] = std::clamp(static_cast<int>(std::floor((points_[i][a] - origin_[a]) / cell_)), 0,
                        dims_[a] - 1);
    }
    flat[i] = static_cast<std::uint32_t>((static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0]);
    ++start_[flat[i] + 1];
  }
  for (std::size_t k = 0; k < ncells; ++k) start_[k + 1] += start_[k];
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  order_.resize(points_.size());
  sorted_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const std::uint32_t k = fill[flat[i]]++;
    order_[k] = static_cast<std::uint32_t>(i);
    sorted_[k] = points_[i];
  }
}

bool PointHash::cell_range(const Vec3& lo, const Vec3& hi, std::array<int, 3>& a,
                           std::array<int, 3>& b) const {
  if (points_.empty()) return false;
  for (int k = 0; k < 3; ++k) {
    const double fa = std::floor((lo[k] - origin_[k]) / cell_);
    const double fb = std::floor((hi[k] - origin_[k]) / cell_);
    if (!(fb >= 0.0) || !(fa < dims_[k]) || fa > fb) return false;
    a[k] = static_cast<int>(std::max(fa, 0.0));
    b[k] = static_cast<int>(std::min(fb, static_cast<double>(dims_[k] - 1)));
  }
  return true;
}

std::optional<std::size_t> PointHash::nearest_within(const Vec3& q, double radius) const {
  std::optional<std::size_t> best;
  double best_d = radius * radius;
  const Vec3 r = Vec3::Constant(radius);
  for_each_in_box(q - r, q + r, [&](std::uint32_t i) {
    const double d = (points_[i] - q).squaredNorm();
    if (d < best_d || (d == best_d && (!best || i < *best))) {
      best_d = d;
      best = i;
    }
  });
  return best;
}

bool PointHash::any_within(const Vec3& q, double radius) const {
  const double r2 = radius * radius;
  bool found = false;
  const Vec3 r = Vec3::Constant(radius);
  std::array<int, 3> a, b;
  if (!cell_range(q - r, q + r, a, b)) return false;
  for (int z = a[2]; z <= b[2] && !found; ++z)
    for (int y = a[1]; y <= b[1] && !found; ++y) {
      const std::size_t row = (static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0];
      for (std::uint32_t k = start_[row + a[0]]; k < start_[row + b[0] + 1]; ++k) {
        if ((sorted_[k] - q).squaredNorm() <= r2) {
          found = true;
          break;
        }
      }
    }
  return found;
}

}  // namespace reorient
