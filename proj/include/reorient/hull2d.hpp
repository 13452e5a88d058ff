#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace reorient {

using Vec2 = Eigen::Vector2d;

/// Convex hull in counter-clockwise order without collinear vertices
/// (Andrew's monotone chain). Degenerate inputs yield 1 or 2 vertices.
std::vector<Vec2> convex_hull(std::span<const Vec2> pts);

/// Index form of convex_hull, referring into `pts`.
std::vector<std::size_t> convex_hull_indices(std::span<const Vec2> pts);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Signed distance from `p` to the boundary of a convex polygon given in
/// counter-clockwise order: positive inside, negative outside. For a point or
/// segment "polygon" the result is minus the distance to it.
double signed_distance_to_hull(const Vec2& p, std::span<const Vec2> hull);

}  // namespace reorient
