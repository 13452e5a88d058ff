#pragma once

#include <array>
#include <cmath>
#include <random>
#include <set>

#include "reorient/scene.hpp"

namespace fixtures {

using reorient::PointList;
using reorient::Vec3;

/// Grid samples on the six faces of the box [lo, hi], about `step` apart,
/// each point once.
inline PointList box_surface(const Vec3& lo, const Vec3& hi, double step) {
  PointList out;
  std::set<std::array<long long, 3>> seen;
  const Vec3 ext = hi - lo;
  int n[3];
  for (int a = 0; a < 3; ++a) n[a] = std::max(1, static_cast<int>(std::round(ext[a] / step)));
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i <= n[u]; ++i) {
        for (int j = 0; j <= n[v]; ++j) {
          Vec3 p;
          p[axis] = side ? hi[axis] : lo[axis];
          p[u] = lo[u] + ext[u] * i / n[u];
          p[v] = lo[v] + ext[v] * j / n[v];
          const std::array<long long, 3> key{std::llround(p.x() * 1e9), std::llround(p.y() * 1e9),
                                             std::llround(p.z() * 1e9)};
          if (seen.insert(key).second) out.push_back(p);
        }
      }
    }
  }
  return out;
}

/// Grid on the rectangle [x0, x1] x [y0, y1] at height z.
inline PointList plane_patch(double x0, double x1, double y0, double y1, double z, double step) {
  PointList out;
  const int nx = static_cast<int>(std::round((x1 - x0) / step));
  const int ny = static_cast<int>(std::round((y1 - y0) / step));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) out.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, z);
  return out;
}

inline PointList random_cloud(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PointList out(n);
  for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
  return out;
}

/// Scene keeping every given point (no resampling loss).
inline reorient::SegmentedScene exact_scene(PointList object, PointList support, PointList table) {
  const std::size_t n = object.size() + support.size() + table.size();
  return reorient::SegmentedScene::from_clouds(std::move(object), std::move(support),
                                               std::move(table), n);
}

}  // namespace fixtures
