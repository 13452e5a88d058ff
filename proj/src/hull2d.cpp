#include "reorient/hull2d.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace reorient {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<std::size_t> convex_hull_indices(std::span<const Vec2> pts) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].x() != pts[b].x()) return pts[a].x() < pts[b].x();
    if (pts[a].y() != pts[b].y()) return pts[a].y() < pts[b].y();
    return a < b;
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; }),
            idx.end());
  if (idx.size() < 3) return idx;

  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && cross(pts[h[k - 2]], pts[h[k - 1]], pts[i]) <= 0) --k;
    h[k++] = i;
  }
  for (std::size_t t = idx.size() - 1, lo = k + 1; t-- > 0;) {
    const std::size_t i = idx[t];
    while (k >= lo && cross(pts[h[k - 2]], pts[h[k - 1]], pts[i]) <= 0) --k;
    h[k++] = i;
  }
  h.resize(k - 1);
  return h;
}

std::vector<Vec2> convex_hull(std::span<const Vec2> pts) {
  std::vector<Vec2> out;
  for (std::size_t i : convex_hull_indices(pts)) out.push_back(pts[i]);
  return out;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double signed_distance_to_hull(const Vec2& p, std::span<const Vec2> hull) {
  if (hull.empty()) return -std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return -(p - hull[0]).norm();
  if (hull.size() == 2) return -point_segment_distance(p, hull[0], hull[1]);

  bool inside = true;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < 0) inside = false;
    dmin = std::min(dmin, point_segment_distance(p, a, b));
  }
  return inside ? dmin : -dmin;
}

}  // namespace reorient
