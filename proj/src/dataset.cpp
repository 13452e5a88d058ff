#include "reorient/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "reorient/error.hpp"
#include "reorient/hull2d.hpp"
#include "reorient/parallel.hpp"
#include "reorient/pipeline.hpp"

namespace reorient {

namespace {

constexpr std::uint64_t kStreamPair = 11;
constexpr std::uint64_t kStreamScene = 12;
constexpr std::uint64_t kStreamDrop = 13;
constexpr std::uint64_t kStreamInit = 14;

using Rng = std::mt19937_64;

struct Box {
  Vec3 lo, hi;
};

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

int cells(double length, double density) {
  return std::max(1, static_cast<int>(std::lround(length * std::sqrt(density))));
}

bool inside_closed(const Vec3& p, const Box& b) {
  constexpr double eps = 1e-12;
  return (p.array() >= b.lo.array() - eps).all() && (p.array() <= b.hi.array() + eps).all();
}

/// Jittered-grid samples on all faces of a union of boxes, dropping samples
/// that lie on or inside another box of the union.
void sample_boxes(const std::vector<Box>& boxes, double density, Rng& rng, PointList& out) {
  for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
    const Box& b = boxes[bi];
    for (int axis = 0; axis < 3; ++axis) {
      const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
      const double lu = b.hi[ua] - b.lo[ua], lv = b.hi[va] - b.lo[va];
      const int nu = cells(lu, density), nv = cells(lv, density);
      for (double face : {b.lo[axis], b.hi[axis]}) {
        for (int i = 0; i < nu; ++i)
          for (int j = 0; j < nv; ++j) {
            Vec3 p;
            p[axis] = face;
            p[ua] = b.lo[ua] + lu * (i + unit(rng)) / nu;
            p[va] = b.lo[va] + lv * (j + unit(rng)) / nv;
            bool hidden = false;
            for (std::size_t bj = 0; bj < boxes.size() && !hidden; ++bj) {
              hidden = bj != bi && inside_closed(p, boxes[bj]);
            }
            if (!hidden) out.push_back(p);
          }
      }
    }
  }
}

// Cylinder pieces with the axis along z through (0, 0); `frame` maps them
// into place.
void sample_cylinder_side(double r, double z0, double z1, double density, Rng& rng,
                          const RigidTransform& frame, PointList& out) {
  const int nt = cells(2.0 * std::numbers::pi * r, density), nz = cells(z1 - z0, density);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nz; ++j) {
      const double t = 2.0 * std::numbers::pi * (i + unit(rng)) / nt;
      const double z = z0 + (z1 - z0) * (j + unit(rng)) / nz;
      out.push_back(frame.apply(Vec3(r * std::cos(t), r * std::sin(t), z)));
    }
}

void sample_annulus(double r0, double r1, double z, double density, Rng& rng,
                    const RigidTransform& frame, PointList& out) {
  const double area = std::numbers::pi * (r1 * r1 - r0 * r0);
  const int nr = cells(r1 - r0, density);
  const int nt = std::max(1, static_cast<int>(std::lround(area * density / nr)));
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const double u = (i + unit(rng)) / nr;
      const double rr = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
      const double t = 2.0 * std::numbers::pi * (j + unit(rng)) / nt;
      out.push_back(frame.apply(Vec3(rr * std::cos(t), rr * std::sin(t), z)));
    }
}

PointList sample_object(const ObjectSpec& o, double density, Rng& rng) {
  PointList pts;
  const Vec3& s = o.size;
  switch (o.kind) {
    case ObjectKind::Box:
    case ObjectKind::Plate:
      sample_boxes({{Vec3(-s.x() / 2, -s.y() / 2, 0), Vec3(s.x() / 2, s.y() / 2, s.z())}}, density,
                   rng, pts);
      break;
    case ObjectKind::LShape: {
      const double t = o.thickness;
      sample_boxes({{Vec3(-s.x() / 2, -s.y() / 2, 0), Vec3(s.x() / 2, s.y() / 2, t)},
                    {Vec3(-s.x() / 2, -s.y() / 2, t), Vec3(-s.x() / 2 + t, s.y() / 2, s.z())}},
                   density, rng, pts);
      break;
    }
    case ObjectKind::Rod: {
      const double r = s.y() / 2, len = s.x();
      // Local z becomes world x; axis at height r.
      RigidTransform frame;
      frame.R << 0, 0, 1, 1, 0, 0, 0, 1, 0;
      frame.t = Vec3(-len / 2, 0, r);
      sample_cylinder_side(r, 0, len, density, rng, frame, pts);
      sample_annulus(0, r, 0, density, rng, frame, pts);
      sample_annulus(0, r, len, density, rng, frame, pts);
      break;
    }
  }
  return pts;
}

PointList sample_support(const SupportSpec& sp, double density, Rng& rng) {
  PointList pts;
  const double X = sp.size.x(), Y = sp.size.y(), H = sp.size.z();
  const double w = sp.wall, f = sp.floor;
  switch (sp.kind) {
    case SupportKind::Box:
      sample_boxes({{Vec3(-X / 2, -Y / 2, 0), Vec3(X / 2, Y / 2, H)}}, density, rng, pts);
      break;
    case SupportKind::Tray:
      sample_boxes({{Vec3(-X / 2, -Y / 2, 0), Vec3(X / 2, Y / 2, f)},
                    {Vec3(-X / 2, -Y / 2, f), Vec3(X / 2, -Y / 2 + w, H)},
                    {Vec3(-X / 2, Y / 2 - w, f), Vec3(X / 2, Y / 2, H)},
                    {Vec3(-X / 2, -Y / 2 + w, f), Vec3(-X / 2 + w, Y / 2 - w, H)},
                    {Vec3(X / 2 - w, -Y / 2 + w, f), Vec3(X / 2, Y / 2 - w, H)}},
                   density, rng, pts);
      break;
    case SupportKind::SlottedHolder: {
      const double s = sp.slot;
      sample_boxes({{Vec3(-X / 2, -Y / 2, 0), Vec3(-s / 2, Y / 2, H)},
                    {Vec3(s / 2, -Y / 2, 0), Vec3(X / 2, Y / 2, H)},
                    {Vec3(-s / 2, -Y / 2, 0), Vec3(s / 2, Y / 2, f)}},
                   density, rng, pts);
      break;
    }
    case SupportKind::Beaker: {
      const double R = X / 2, Ri = R - w;
      const RigidTransform id;
      sample_cylinder_side(R, 0, H, density, rng, id, pts);
      sample_cylinder_side(Ri, f, H, density, rng, id, pts);
      sample_annulus(Ri, R, H, density, rng, id, pts);
      sample_annulus(0, R, 0, density, rng, id, pts);
      sample_annulus(0, Ri, f, density, rng, id, pts);
      break;
    }
  }
  return pts;
}

void aabb(std::span<const Vec3> pts, Vec3& lo, Vec3& hi) {
  lo = hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
}

Mat3 uniform_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  if (q.norm() < 1e-12) return Mat3::Identity();
  return q.normalized().toRotationMatrix();
}

double object_diameter_bound(std::span<const Vec3> obj) {
  const Vec3 c = centroid(obj);
  double r = 0.0;
  for (const auto& p : obj) r = std::max(r, (p - c).norm());
  return 2.0 * r;
}

/// Distance from the AABB center to its boundary along unit direction u.
double ray_to_box(const Vec2& half, const Vec2& u) {
  double s = std::numeric_limits<double>::infinity();
  if (std::abs(u.x()) > 1e-12) s = std::min(s, half.x() / std::abs(u.x()));
  if (std::abs(u.y()) > 1e-12) s = std::min(s, half.y() / std::abs(u.y()));
  return s;
}

template <typename Enum, std::size_t N>
Enum enum_from_name(std::string_view s, const std::array<Enum, N>& all,
                    std::string_view (*name)(Enum)) {
  for (Enum e : all) {
    if (name(e) == s) return e;
  }
  throw Error(ErrorCode::BadSpec, "unknown kind: " + std::string(s));
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::BadSpec, "expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw Error(ErrorCode::BadSpec, "unknown spec key: " + k);
    }
  }
}

Vec3 vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::BadSpec, "size needs 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string_view object_kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::Box: return "box";
    case ObjectKind::Rod: return "rod";
    case ObjectKind::Plate: return "plate";
    case ObjectKind::LShape: return "L-shape";
  }
  return "unknown";
}

std::string_view support_kind_name(SupportKind k) {
  switch (k) {
    case SupportKind::Tray: return "tray";
    case SupportKind::SlottedHolder: return "slotted_holder";
    case SupportKind::Beaker: return "beaker";
    case SupportKind::Box: return "box";
  }
  return "unknown";
}

ObjectKind object_kind_from_name(std::string_view s) {
  return enum_from_name<ObjectKind, 4>(
      s, {ObjectKind::Box, ObjectKind::Rod, ObjectKind::Plate, ObjectKind::LShape},
      object_kind_name);
}

SupportKind support_kind_from_name(std::string_view s) {
  return enum_from_name<SupportKind, 4>(
      s, {SupportKind::Tray, SupportKind::SlottedHolder, SupportKind::Beaker, SupportKind::Box},
      support_kind_name);
}

void PrimitivePairSpec::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::BadSpec, msg); };
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
    bad("pair id must be a plain directory name");
  }
  if (!(object.size.minCoeff() > 0.0)) bad("object dimensions must be positive");
  if (!(support.size.minCoeff() > 0.0)) bad("support dimensions must be positive");
  if (!(object_density > 0 && support_density > 0 && table_density > 0)) {
    bad("sampling densities must be positive");
  }
  const Vec3& o = object.size;
  if (object.kind == ObjectKind::LShape &&
      !(object.thickness > 0 && object.thickness < o.x() && object.thickness < o.z())) {
    bad("L-shape thickness must be positive and below its extents");
  }
  const Vec3& s = support.size;
  switch (support.kind) {
    case SupportKind::Tray:
      if (!(support.wall > 0 && 2 * support.wall < std::min(s.x(), s.y()))) bad("bad tray wall");
      if (!(support.floor > 0 && support.floor < s.z())) bad("tray walls need positive height");
      break;
    case SupportKind::SlottedHolder:
      if (!(support.slot > 0 && support.slot < s.x())) bad("bad slot width");
      if (!(support.floor > 0 && support.floor < s.z())) bad("slot needs positive depth");
      break;
    case SupportKind::Beaker:
      if (!(support.wall > 0 && support.wall < s.x() / 2)) bad("bad beaker wall");
      if (!(support.floor > 0 && support.floor < s.z())) bad("beaker walls need positive height");
      break;
    case SupportKind::Box:
      break;
  }
  if (o.norm() > 2.0 * s.norm()) bad("object does not fit within twice the support extents");
}

void to_json(nlohmann::json& j, const PrimitivePairSpec& s) {
  j = nlohmann::json{
      {"id", s.id},
      {"object",
       {{"kind", object_kind_name(s.object.kind)},
        {"size", {s.object.size.x(), s.object.size.y(), s.object.size.z()}},
        {"thickness", s.object.thickness}}},
      {"support",
       {{"kind", support_kind_name(s.support.kind)},
        {"size", {s.support.size.x(), s.support.size.y(), s.support.size.z()}},
        {"wall", s.support.wall},
        {"floor", s.support.floor},
        {"slot", s.support.slot}}},
      {"object_density", s.object_density},
      {"support_density", s.support_density},
      {"table_density", s.table_density}};
}

void from_json(const nlohmann::json& j, PrimitivePairSpec& s) {
  try {
    check_keys(j, {"id", "object", "support", "object_density", "support_density", "table_density"});
    s = PrimitivePairSpec{};
    if (j.contains("id")) s.id = j.at("id").get<std::string>();
    if (j.contains("object")) {
      const auto& o = j.at("object");
      check_keys(o, {"kind", "size", "thickness"});
      if (o.contains("kind")) s.object.kind = object_kind_from_name(o.at("kind").get<std::string>());
      if (o.contains("size")) s.object.size = vec3_from(o.at("size"));
      if (o.contains("thickness")) s.object.thickness = o.at("thickness").get<double>();
    }
    if (j.contains("support")) {
      const auto& o = j.at("support");
      check_keys(o, {"kind", "size", "wall", "floor", "slot"});
      if (o.contains("kind")) s.support.kind = support_kind_from_name(o.at("kind").get<std::string>());
      if (o.contains("size")) s.support.size = vec3_from(o.at("size"));
      if (o.contains("wall")) s.support.wall = o.at("wall").get<double>();
      if (o.contains("floor")) s.support.floor = o.at("floor").get<double>();
      if (o.contains("slot")) s.support.slot = o.at("slot").get<double>();
    }
    if (j.contains("object_density")) s.object_density = j.at("object_density").get<double>();
    if (j.contains("support_density")) s.support_density = j.at("support_density").get<double>();
    if (j.contains("table_density")) s.table_density = j.at("table_density").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadSpec, std::string("pair spec: ") + e.what());
  }
}

double surface_area(const ObjectSpec& o) {
  const Vec3& s = o.size;
  switch (o.kind) {
    case ObjectKind::Box:
    case ObjectKind::Plate:
      return 2.0 * (s.x() * s.y() + s.y() * s.z() + s.x() * s.z());
    case ObjectKind::Rod: {
      const double r = s.y() / 2;
      return 2.0 * std::numbers::pi * r * s.x() + 2.0 * std::numbers::pi * r * r;
    }
    case ObjectKind::LShape: {
      const double t = o.thickness;
      // Union of the base slab and the upright leg.
      const double base = 2.0 * (s.x() * s.y() + s.y() * t + s.x() * t);
      const double leg = 2.0 * (t * s.y() + s.y() * (s.z() - t) + t * (s.z() - t));
      return base + leg - 2.0 * t * s.y();
    }
  }
  return 0.0;
}

PrimitivePair make_primitive_pair(const PrimitivePairSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = derived_rng(seed, kStreamPair, 0);
  PrimitivePair pair;
  pair.object = sample_object(spec.object, spec.object_density, rng);
  pair.support = sample_support(spec.support, spec.support_density, rng);
  return pair;
}

RawScene compose_scene(const PrimitivePairSpec& spec, const PrimitivePair& pair, std::uint64_t seed) {
  Rng rng = derived_rng(seed, kStreamScene, 0);
  Vec3 slo, shi, olo, ohi;
  aabb(pair.support, slo, shi);
  aabb(pair.object, olo, ohi);
  const double D = (ohi - olo).norm();
  const Vec2 half(0.5 * (shi.x() - slo.x()), 0.5 * (shi.y() - slo.y()));
  const Vec2 mid(0.5 * (shi.x() + slo.x()), 0.5 * (shi.y() + slo.y()));

  const double phi = 2.0 * std::numbers::pi * unit(rng);
  const Vec2 u(std::cos(phi), std::sin(phi));
  const double dist = ray_to_box(half, u) + D * (1.0 + unit(rng));
  const double yaw = 2.0 * std::numbers::pi * unit(rng);
  const Vec2 place = mid + dist * u;

  RawScene raw;
  raw.support = pair.support;
  const Vec3 oc(0.5 * (olo.x() + ohi.x()), 0.5 * (olo.y() + ohi.y()), olo.z());
  const RigidTransform T{rot_z(yaw), Vec3(place.x(), place.y(), 0.0) - rot_z(yaw) * oc};
  raw.object = transform_cloud(pair.object, T);

  // Table patch around both items; the footprints underneath are occluded.
  Vec3 alo, ahi;
  aabb(raw.object, alo, ahi);
  const double margin = D;
  const double x0 = std::min(slo.x(), alo.x()) - margin, x1 = std::max(shi.x(), ahi.x()) + margin;
  const double y0 = std::min(slo.y(), alo.y()) - margin, y1 = std::max(shi.y(), ahi.y()) + margin;
  const int nx = cells(x1 - x0, spec.table_density), ny = cells(y1 - y0, spec.table_density);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const Vec3 p(x0 + (x1 - x0) * (i + unit(rng)) / nx, y0 + (y1 - y0) * (j + unit(rng)) / ny, 0.0);
      const bool under_support = p.x() >= slo.x() && p.x() <= shi.x() && p.y() >= slo.y() &&
                                 p.y() <= shi.y();
      const bool under_object = p.x() >= alo.x() && p.x() <= ahi.x() && p.y() >= alo.y() &&
                                p.y() <= ahi.y();
      if (!under_support && !under_object) raw.table.push_back(p);
    }
  return raw;
}

std::vector<Pose6D> drop_trials(const StabilityOracle& oracle, const SegmentedScene& scene,
                                std::size_t n, std::uint64_t seed, double delta2,
                                unsigned threads) {
  if (n == 0) return {};
  const PointList& obj = scene.object();
  const Vec3 c0 = centroid(obj);
  Vec3 lo, hi;
  aabb(scene.support(), lo, hi);
  const double drop_z = hi.z() + object_diameter_bound(obj);

  std::vector<PlacementCandidate> trials(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng = derived_rng(seed, kStreamDrop, i);
    const Mat3 R = uniform_rotation(rng);
    const Vec3 c(lo.x() + (hi.x() - lo.x()) * unit(rng), lo.y() + (hi.y() - lo.y()) * unit(rng),
                 drop_z);
    PlacementCandidate& t = trials[i];
    try {
      const SettleResult sr = oracle.settle(RigidTransform{R, c - R * c0});
      t = score_candidate(oracle, sr.settled, 1);
    } catch (const Error& e) {
      t.error = e.what();
    }
  });
  std::erase_if(trials, [](const PlacementCandidate& t) {
    return !t.ok() || t.report.category != Category::Stable;
  });
  std::stable_sort(trials.begin(), trials.end(), [](const auto& a, const auto& b) {
    return a.report.score > b.report.score;
  });
  std::vector<PointList> clouds;
  for (const auto& t : trials) clouds.push_back(t.transformed_object);
  std::vector<Pose6D> out;
  for (std::size_t k : dedup_filter(clouds, delta2, scene_diversity_metric(scene))) {
    out.push_back(trials[k].delta);
  }
  return out;
}

std::vector<Pose6D> variation_poses(const StabilityOracle& oracle, const Pose6D& stable,
                                    const SweepParams& params) {
  const Vec3 c0 = centroid(oracle.object());
  const RigidTransform T = pose_to_transform(stable);
  const Vec3 c = T.apply(c0);
  std::vector<Pose6D> out{stable};
  auto emit = [&](const Mat3& R, const Vec3& cc) { out.push_back(transform_to_pose({R, cc - R * c0})); };
  for (int a = 0; a < 3; ++a)
    for (int s : {1, -1})
      for (int j = 1; j <= params.k; ++j) emit(T.R, c + s * j * params.dt * Vec3::Unit(a));
  for (int frame = 0; frame < 2; ++frame)
    for (int a = 0; a < 3; ++a)
      for (int s : {1, -1})
        for (int j = 1; j <= params.k; ++j) {
          const Mat3 Q = Eigen::AngleAxisd(s * j * params.dtheta, Vec3::Unit(a)).toRotationMatrix();
          emit(frame == 0 ? Mat3(Q * T.R) : Mat3(T.R * Q), c);
        }
  return out;
}

std::vector<DatasetSample> variation_sweep(const StabilityOracle& oracle, const Pose6D& stable,
                                           const std::string& scene_id,
                                           const SweepParams& params, unsigned threads) {
  const auto poses = variation_poses(oracle, stable, params);
  std::vector<std::optional<DatasetSample>> slots(poses.size());
  parallel_for(poses.size(), threads, [&](std::size_t i) {
    try {
      slots[i] = DatasetSample{scene_id, poses[i], oracle.classify(poses[i]).category};
    } catch (const Error&) {
    }
  });
  std::vector<DatasetSample> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::vector<Pose6D> initial_table_poses(const StabilityOracle& oracle, const SegmentedScene& scene,
                                        std::size_t n, std::uint64_t seed) {
  const PointList& obj = scene.object();
  const Vec3 c0 = centroid(obj);
  Vec3 lo, hi;
  aabb(scene.support(), lo, hi);
  const Vec2 half(0.5 * (hi.x() - lo.x()), 0.5 * (hi.y() - lo.y()));
  const Vec2 mid(0.5 * (hi.x() + lo.x()), 0.5 * (hi.y() + lo.y()));
  Vec3 olo, ohi;
  aabb(obj, olo, ohi);
  const double D = (ohi - olo).norm();
  const double tol = oracle.params().contact_tol;
  const PointHash support(scene.support_detail(), tol);

  std::vector<Pose6D> out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = derived_rng(seed, kStreamInit, i);
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const Vec2 u(std::cos(phi), std::sin(phi));
      const Vec2 xy = mid + (ray_to_box(half, u) + D * (1.0 + unit(rng))) * u;
      const Mat3 R = rot_z(2.0 * std::numbers::pi * unit(rng));
      const Vec3 c(xy.x(), xy.y(), c0.z());
      const Pose6D pose = transform_to_pose({R, c - R * c0});
      const PointList placed = oracle.place(pose);
      bool clear = true;
      for (const auto& p : placed) {
        if (oracle.penetrates(p) || support.any_within(p, tol)) {
          clear = false;
          break;
        }
      }
      if (clear) {
        out.push_back(pose);
        break;
      }
    }
  }
  return out;
}

Pose6D relative_delta(const Pose6D& from, const Pose6D& to) {
  return transform_to_pose(pose_to_transform(to) * pose_to_transform(from).inverse());
}

GroundTruthSets ground_truth(const std::vector<Pose6D>& initial,
                             const std::vector<DatasetSample>& samples,
                             const std::vector<Pose6D>& stable) {
  GroundTruthSets gt;
  for (const auto& a : initial)
    for (const auto& s : stable) gt.t_gt1.push_back(relative_delta(a, s));
  for (const auto& smp : samples) {
    if (smp.label == Category::Stable) continue;
    for (const auto& s : stable) gt.t_gt2.push_back(relative_delta(smp.pose, s));
  }
  return gt;
}

namespace {

nlohmann::json pose_json(const Pose6D& p) { return p.to_array(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
  }
}

/// Generates and writes everything for one pair whose scene.pts already sits
/// in `dir`. Returns the manifest entry.
nlohmann::json process_pair(const std::string& id, const std::filesystem::path& dir,
                            const DatasetParams& params, std::uint64_t pair_seed) {
  const SegmentedScene scene = load_scene(dir / "scene.pts");
  const StabilityOracle oracle(scene, params.stability);
  const auto stable = drop_trials(oracle, scene, params.n_drop, pair_seed, 0.02, params.threads);

  std::vector<DatasetSample> samples;
  for (const auto& s : stable) {
    auto sweep = variation_sweep(oracle, s, id, params.sweep, params.threads);
    samples.insert(samples.end(), sweep.begin(), sweep.end());
  }
  const auto initial = initial_table_poses(oracle, scene, params.n_init, pair_seed);
  const GroundTruthSets gt = ground_truth(initial, samples, stable);

  std::string lines;
  std::map<std::string, std::size_t> counts;
  for (auto c : {Category::Stable, Category::Separation, Category::Penetration,
                 Category::UnstableContact}) {
    counts[std::string(category_name(c))] = 0;
  }
  for (const auto& s : samples) {
    const std::string label(category_name(s.label));
    ++counts[label];
    lines += nlohmann::json{{"pose", pose_json(s.pose)}, {"label", label}}.dump() + "\n";
  }
  write_text(dir / "poses.jsonl", lines);

  nlohmann::json g;
  g["stable"] = nlohmann::json::array();
  for (const auto& s : stable) g["stable"].push_back(pose_json(s));
  g["initial"] = nlohmann::json::array();
  for (const auto& s : initial) g["initial"].push_back(pose_json(s));
  g["t_gt1"] = nlohmann::json::array();
  for (const auto& p : gt.t_gt1.poses()) g["t_gt1"].push_back(pose_json(p));
  g["t_gt2"] = nlohmann::json::array();
  for (const auto& p : gt.t_gt2.poses()) g["t_gt2"].push_back(pose_json(p));
  write_text(dir / "gt.json", g.dump() + "\n");

  return {{"id", id},
          {"stable_placements", stable.size()},
          {"initial_poses", initial.size()},
          {"samples", samples.size()},
          {"labels", counts},
          {"t_gt1_rows", gt.t_gt1.size()},
          {"t_gt2_rows", gt.t_gt2.size()}};
}

nlohmann::json finish_manifest(nlohmann::json entries, const DatasetParams& params,
                               const std::filesystem::path& out_dir) {
  std::map<std::string, std::size_t> totals;
  for (const auto& e : entries) {
    if (!e.contains("labels")) continue;
    for (const auto& [k, v] : e.at("labels").items()) totals[k] += v.get<std::size_t>();
  }
  nlohmann::json manifest{{"seed", params.seed},
                          {"n_drop", params.n_drop},
                          {"n_init", params.n_init},
                          {"pairs", std::move(entries)},
                          {"labels", totals}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

std::uint64_t pair_seed(std::uint64_t seed, std::size_t index) {
  return derived_rng(seed, kStreamPair, index + 1)();
}

}  // namespace

nlohmann::json build_dataset(const std::vector<PrimitivePairSpec>& pairs,
                             const std::filesystem::path& out_dir, const DatasetParams& params) {
  ensure_dir(out_dir);
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& spec = pairs[i];
    const std::uint64_t ps = pair_seed(params.seed, i);
    try {
      const auto dir = out_dir / spec.id;
      ensure_dir(dir);
      const PrimitivePair pair = make_primitive_pair(spec, ps);
      write_pts(dir / "scene.pts", compose_scene(spec, pair, ps));
      entries.push_back(process_pair(spec.id, dir, params, ps));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      entries.push_back({{"id", spec.id},
                         {"error", std::string(error_code_name(e.code())) + ": " + e.what()}});
    }
  }
  return finish_manifest(std::move(entries), params, out_dir);
}

nlohmann::json build_dataset_from_scenes(
    const std::vector<std::pair<std::string, std::filesystem::path>>& scenes,
    const std::filesystem::path& out_dir, const DatasetParams& params) {
  ensure_dir(out_dir);
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& [id, src] = scenes[i];
    try {
      const auto dir = out_dir / id;
      ensure_dir(dir);
      write_pts(dir / "scene.pts", read_pts(src));
      entries.push_back(process_pair(id, dir, params, pair_seed(params.seed, i)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      entries.push_back({{"id", id},
                         {"error", std::string(error_code_name(e.code())) + ": " + e.what()}});
    }
  }
  return finish_manifest(std::move(entries), params, out_dir);
}

}  // namespace reorient
