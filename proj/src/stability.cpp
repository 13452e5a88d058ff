#include "reorient/stability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "reorient/error.hpp"
#include "reorient/hull2d.hpp"

namespace reorient {

// ---------------------------------------------------------------------------
// Occupancy grid

bool OccupancyGrid::cell_of(const Vec3& p, std::array<int, 3>& cell) const {
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - origin_[a]) / voxel_);
    if (!(f >= 0.0) || f >= static_cast<double>(dims_[a])) return false;
    cell[a] = static_cast<int>(f);
  }
  return true;
}

VoxelState OccupancyGrid::state(int x, int y, int z) const {
  if (x < 0 || y < 0 || z < 0 || x >= dims_[0] || y >= dims_[1] || z >= dims_[2]) {
    return VoxelState::Free;
  }
  return cells_[flat(x, y, z)];
}

VoxelState OccupancyGrid::state_at(const Vec3& p) const {
  std::array<int, 3> c;
  if (!cell_of(p, c)) return VoxelState::Free;
  return cells_[flat(c[0], c[1], c[2])];
}

Vec3 OccupancyGrid::center(int x, int y, int z) const {
  return origin_ + voxel_ * Vec3(x + 0.5, y + 0.5, z + 0.5);
}

std::size_t OccupancyGrid::count(VoxelState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

OccupancyGrid build_occupancy(std::span<const Vec3> support_points, double voxel) {
  if (support_points.size() < 8) {
    throw Error(ErrorCode::TooFewPoints, "occupancy grid needs at least 8 support points");
  }
  if (!(voxel > 0.0)) throw Error(ErrorCode::BadVoxel, "voxel size must be positive");
  Vec3 lo = support_points.front(), hi = support_points.front();
  for (const auto& p : support_points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // The diameter lies between the largest AABB extent and the AABB diagonal;
  // only the ambiguous band needs the exact pairwise scan.
  const double extent = (hi - lo).maxCoeff();
  const double diagonal = (hi - lo).norm();
  if (voxel > diagonal / 4.0 ||
      (voxel > extent / 4.0 && voxel > support_diameter(support_points) / 4.0)) {
    throw Error(ErrorCode::BadVoxel, "voxel larger than support diameter / 4");
  }

  OccupancyGrid g;
  g.voxel_ = voxel;
  g.origin_ = lo - Vec3::Constant(2.0 * voxel);
  for (int a = 0; a < 3; ++a) {
    g.dims_[a] = static_cast<int>(std::ceil((hi[a] - lo[a]) / voxel)) + 5;
  }
  g.cells_.assign(static_cast<std::size_t>(g.dims_[0]) * g.dims_[1] * g.dims_[2],
                  VoxelState::Free);
  for (const auto& p : support_points) {
    std::array<int, 3> c;
    if (g.cell_of(p, c)) g.cells_[g.flat(c[0], c[1], c[2])] = VoxelState::Shell;
  }

  // Flood the free space reachable from the boundary; what remains free is
  // enclosed.
  std::vector<char> reached(g.cells_.size(), 0);
  std::deque<std::array<int, 3>> queue;
  auto push = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= g.dims_[0] || y >= g.dims_[1] || z >= g.dims_[2]) return;
    const std::size_t f = g.flat(x, y, z);
    if (reached[f] || g.cells_[f] != VoxelState::Free) return;
    reached[f] = 1;
    queue.push_back({x, y, z});
  };
  for (int z = 0; z < g.dims_[2]; ++z)
    for (int y = 0; y < g.dims_[1]; ++y)
      for (int x = 0; x < g.dims_[0]; ++x) {
        if (x == 0 || y == 0 || z == 0 || x == g.dims_[0] - 1 || y == g.dims_[1] - 1 ||
            z == g.dims_[2] - 1) {
          push(x, y, z);
        }
      }
  while (!queue.empty()) {
    const auto [x, y, z] = queue.front();
    queue.pop_front();
    push(x - 1, y, z);
    push(x + 1, y, z);
    push(x, y - 1, z);
    push(x, y + 1, z);
    push(x, y, z - 1);
    push(x, y, z + 1);
  }
  for (std::size_t f = 0; f < g.cells_.size(); ++f) {
    if (g.cells_[f] == VoxelState::Free && !reached[f]) g.cells_[f] = VoxelState::Interior;
  }
  return g;
}

PenetrationReport penetration_report(std::span<const Vec3> object_points,
                                     const OccupancyGrid& grid) {
  PenetrationReport rep;
  if (object_points.empty()) return rep;
  std::size_t inside = 0;
  const double v = grid.voxel();
  for (const auto& p : object_points) {
    std::array<int, 3> c;
    if (!grid.cell_of(p, c) || grid.state(c[0], c[1], c[2]) != VoxelState::Interior) continue;
    ++inside;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 1;; ++r) {
      for (int dz = -r; dz <= r; ++dz)
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
            const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
            if (grid.state(x, y, z) == VoxelState::Interior) continue;
            best = std::min(best, (grid.center(x, y, z) - p).norm());
          }
      // Voxels at ring r+1 are at least (r + 0.5) voxels away.
      if (best <= (r + 0.5) * v) break;
    }
    rep.max_depth = std::max(rep.max_depth, best);
  }
  rep.fraction = static_cast<double>(inside) / static_cast<double>(object_points.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Contacts and margin

namespace {

ContactReport contacts_against(std::span<const Vec3> pts, const PointHash& support,
                               double table_z, double tol) {
  ContactReport rep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& p = pts[i];
    bool touched = false;
    if (std::abs(p.z() - table_z) <= tol) {
      rep.witnesses.emplace_back(p.x(), p.y(), table_z);
      touched = true;
    }
    if (auto s = support.nearest_within(p, tol)) {
      rep.witnesses.push_back(support.points()[*s]);
      rep.afforded_by_support = true;
      touched = true;
    }
    if (touched) rep.contacts.push_back(i);
  }
  if (!rep.witnesses.empty()) {
    std::vector<Vec2> xy;
    xy.reserve(rep.witnesses.size());
    for (const auto& w : rep.witnesses) xy.emplace_back(w.x(), w.y());
    const auto hull = convex_hull(xy);
    const Vec3 c = centroid(pts);
    rep.margin = signed_distance_to_hull(Vec2(c.x(), c.y()), hull);
  }
  return rep;
}

}  // namespace

ContactReport support_margin(std::span<const Vec3> object_points,
                             std::span<const Vec3> support_points, double table_z,
                             double contact_tol) {
  if (!(contact_tol > 0.0)) throw Error(ErrorCode::BadConfig, "contact tolerance must be positive");
  const PointHash hash(support_points, contact_tol);
  return contacts_against(object_points, hash, table_z, contact_tol);
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Stable: return "stable";
    case Category::Separation: return "separation";
    case Category::Penetration: return "penetration";
    case Category::UnstableContact: return "unstable_contact";
  }
  return "unknown";
}

Category category_from_name(std::string_view s) {
  for (auto c : {Category::Stable, Category::Separation, Category::Penetration,
                 Category::UnstableContact}) {
    if (category_name(c) == s) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown category: " + std::string(s));
}

void ScoreWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0) ||
      std::abs(alpha + beta - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadConfig, "score weights must lie in [0,1] and sum to 1");
  }
}

void StabilityParams::validate() const {
  weights.validate();
  if (!(voxel > 0 && contact_tol > 0 && pen_tol >= 0 && pen_ref > 0 && margin_ref > 0 &&
        max_pen >= 0 && settle_eps > 0 && settle_max_iter > 0 && settle_dtheta > 0 &&
        settle_refinements >= 0 && stable_offset > 0 && stable_rotation > 0 && probe_limit >= 1)) {
    throw Error(ErrorCode::BadConfig, "stability parameters out of range");
  }
}

// ---------------------------------------------------------------------------
// Oracle

StabilityOracle::StabilityOracle(const SegmentedScene& scene, const StabilityParams& params)
    : params_(params),
      grid_(build_occupancy(scene.support_detail(), params.voxel)),
      support_hash_(scene.support_detail(), params.contact_tol),
      object_(scene.object()),
      table_z_(scene.table_z()) {
  params_.validate();
}

PointList StabilityOracle::place(const Pose6D& delta) const {
  return transform_cloud(object_, pose_to_transform(delta));
}

bool StabilityOracle::penetrates(const Vec3& p) const {
  constexpr double kTableSlack = 1e-9;
  return p.z() < table_z_ - kTableSlack || grid_.state_at(p) == VoxelState::Interior;
}

double StabilityOracle::penetration_fraction(std::span<const Vec3> pts) const {
  if (pts.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& p : pts) n += penetrates(p) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(pts.size());
}

ContactReport StabilityOracle::contacts(std::span<const Vec3> pts) const {
  return contacts_against(pts, support_hash_, table_z_, params_.contact_tol);
}

namespace {

struct PivotAxis {
  Vec3 point;
  Vec3 dir;  // horizontal unit vector
};

std::vector<PivotAxis> pivot_axes(const PointList& witnesses) {
  std::vector<PivotAxis> axes;
  if (witnesses.empty()) return axes;
  std::vector<Vec2> xy;
  xy.reserve(witnesses.size());
  for (const auto& w : witnesses) xy.emplace_back(w.x(), w.y());
  const auto hull = convex_hull_indices(xy);
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY();
  if (hull.size() == 1) {
    const Vec3& p = witnesses[hull[0]];
    for (const Vec3& d : {ex, ey, Vec3((ex + ey).normalized()), Vec3((ex - ey).normalized())}) {
      axes.push_back({p, d});
    }
    return axes;
  }
  if (hull.size() == 2) {
    const Vec3& a = witnesses[hull[0]];
    const Vec3& b = witnesses[hull[1]];
    const Vec3 u = Vec3(b.x() - a.x(), b.y() - a.y(), 0.0).normalized();
    const Vec3 n(-u.y(), u.x(), 0.0);
    axes.push_back({a, u});
    axes.push_back({a, n});
    axes.push_back({b, n});
    return axes;
  }
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const Vec3& a = witnesses[hull[k]];
    const Vec3& b = witnesses[hull[(k + 1) % hull.size()]];
    const Vec3 u = Vec3(b.x() - a.x(), b.y() - a.y(), 0.0).normalized();
    axes.push_back({a, u});
  }
  return axes;
}

struct Move {
  RigidTransform motion;
  double drop;
};

}  // namespace

SettleResult StabilityOracle::settle(const Pose6D& delta) const {
  return settle(pose_to_transform(delta));
}

SettleResult StabilityOracle::settle(const RigidTransform& start) const {
  return run_settle(start, false);
}

SettleResult StabilityOracle::settle_probe(const Pose6D& delta) const {
  return run_settle(pose_to_transform(delta), true);
}

SettleResult StabilityOracle::run_settle(const RigidTransform& start, bool probe) const {
  const StabilityParams& P = params_;
  const std::size_t n = object_.size();
  RigidTransform T = start;
  PointList cur = transform_cloud(object_, T);
  std::vector<char> pen(n, 0);
  std::size_t npen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pen[i] = penetrates(cur[i]) ? 1 : 0;
    npen += pen[i];
  }
  if (static_cast<double>(npen) > P.max_pen * static_cast<double>(n)) {
    throw Error(ErrorCode::InitialPenetration, "object starts inside the support or table");
  }

  SettleResult res;
  const Vec3 c0 = centroid(cur);
  Vec3 c = c0;
  PointList trial(n);
  std::vector<Move> moves;

  for (int iter = 0;; ++iter) {
    const ContactReport cr = contacts(cur);
    const auto axes = pivot_axes(cr.witnesses);
    bool moved = false;
    for (int level = 0; level <= P.settle_refinements && !moved; ++level) {
      const double scale = std::ldexp(1.0, -level);
      const double dz = P.settle_dz() * scale;
      const double dth = P.settle_dtheta * scale;
      moves.clear();
      moves.push_back({{Mat3::Identity(), Vec3(0, 0, -dz)}, dz});
      for (const auto& ax : axes) {
        const Vec3 r = c - ax.point;
        const double vz = ax.dir.cross(r).z();
        if (std::abs(vz) < 1e-12) continue;
        const double theta = vz < 0 ? dth : -dth;
        const Mat3 Q = Eigen::AngleAxisd(theta, ax.dir).toRotationMatrix();
        const Vec3 nc = Q * r + ax.point;
        moves.push_back({{Q, ax.point - Q * ax.point}, c.z() - nc.z()});
      }
      std::stable_sort(moves.begin(), moves.end(),
                       [](const Move& a, const Move& b) { return a.drop > b.drop; });
      for (const auto& mv : moves) {
        if (mv.drop <= P.settle_eps) break;
        // A tipping move that grazes the support may be lifted by part of its
        // drop; the centroid must still descend.
        RigidTransform motion = mv.motion;
        bool ok = false;
        const bool tipping = !mv.motion.R.isIdentity();
        for (int lift = 0; lift <= (tipping ? 3 : 0) && !ok; ++lift) {
          if ((1.0 - 0.25 * lift) * mv.drop <= P.settle_eps) break;
          motion = mv.motion;
          motion.t.z() += 0.25 * lift * mv.drop;
          ok = true;
          for (std::size_t i = 0; i < n && ok; ++i) {
            trial[i] = motion.apply(cur[i]);
            if (!pen[i] && penetrates(trial[i])) ok = false;
          }
        }
        if (!ok) continue;
        if (iter >= P.settle_max_iter) {
          throw Error(ErrorCode::NoConvergence, "settle budget exhausted while still descending");
        }
        T = motion * T;
        cur = transform_cloud(object_, T);
        for (std::size_t i = 0; i < n; ++i) pen[i] = penetrates(cur[i]) ? 1 : 0;
        c = centroid(cur);
        res.heights.push_back(c.z());
        moved = true;
        break;
      }
    }
    if (moved && probe &&
        (c0.z() - c.z() > P.probe_limit * P.stable_offset ||
         rotation_angle(T.R * start.R.transpose()) > P.probe_limit * P.stable_rotation)) {
      res.iterations = iter + 1;
      res.truncated = true;
      break;
    }
    if (!moved) {
      res.iterations = iter;
      break;
    }
  }

  res.transform = T;
  res.settled = transform_to_pose(T);
  res.displacement = (c - c0).norm();
  res.rotation = rotation_angle(T.R * start.R.transpose());
  return res;
}

StabilityReport StabilityOracle::classify(const Pose6D& delta) const {
  const StabilityParams& P = params_;
  const PointList pts = place(delta);
  StabilityReport rep;
  rep.penetration = penetration_fraction(pts);
  rep.s_pen = std::max(0.0, 1.0 - rep.penetration / P.pen_ref);
  const ContactReport cr = contacts(pts);
  rep.margin = cr.margin;
  rep.afforded_by_support = cr.afforded_by_support;
  rep.contact_count = cr.contacts.size();

  if (rep.penetration > P.pen_tol) {
    rep.category = Category::Penetration;
    rep.s_stab = 0.0;
  } else if (cr.contacts.empty()) {
    rep.category = Category::Separation;
    rep.s_stab = 0.0;
  } else {
    const SettleResult sr = settle_probe(delta);
    rep.displacement = sr.displacement;
    rep.rotation = sr.rotation;
    const bool still =
        sr.displacement <= P.stable_offset && sr.rotation <= P.stable_rotation;
    rep.category = still ? Category::Stable : Category::UnstableContact;
    const double shape = std::clamp(0.5 + cr.margin / (2.0 * P.margin_ref), 0.0, 1.0);
    rep.s_stab = shape * std::exp(-sr.displacement / P.stable_offset -
                                  sr.rotation / P.stable_rotation);
  }
  rep.score = P.weights.alpha * rep.s_stab + P.weights.beta * rep.s_pen;
  return rep;
}

SettleResult settle(const SegmentedScene& scene, const Pose6D& pose, const StabilityParams& params) {
  return StabilityOracle(scene, params).settle(pose);
}

StabilityReport classify_and_score(const SegmentedScene& scene, const Pose6D& pose,
                                   const ScoreWeights& weights, const StabilityParams& params) {
  StabilityParams p = params;
  p.weights = weights;
  return StabilityOracle(scene, p).classify(pose);
}

}  // namespace reorient
