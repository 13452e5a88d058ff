#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "reorient/error.hpp"
#include "reorient/scene.hpp"

using namespace reorient;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("reorient_test_scene_" + name);
}

void write_lines(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("pose_to_transform uses R = Rz Ry Rx") {
  CHECK(pose_to_transform(Pose6D{}).R.isApprox(Mat3::Identity(), 1e-15));
  const auto Tx = pose_to_transform(Pose6D(Vec3::Zero(), Vec3(kPi / 2, 0, 0)));
  CHECK((Tx.apply(Vec3(0, 1, 0)) - Vec3(0, 0, 1)).norm() < 1e-12);
  const auto Tz = pose_to_transform(Pose6D(Vec3::Zero(), Vec3(0, 0, kPi / 2)));
  CHECK((Tz.apply(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);

  const Pose6D p(Vec3(0.1, -0.2, 0.3), Vec3(0.3, -0.4, 1.1));
  const Mat3 expected = rot_z(1.1) * rot_y(-0.4) * rot_x(0.3);
  const auto T = pose_to_transform(p);
  CHECK((T.R - expected).norm() < 1e-14);
  CHECK((T.R.transpose() * T.R - Mat3::Identity()).norm() < 1e-9);
  CHECK(T.R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pose round trip away from gimbal lock") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-kPi + 0.01, kPi - 0.01), b(-kPi / 2 + 0.01, kPi / 2 - 0.01);
  for (int k = 0; k < 200; ++k) {
    const Pose6D p(Vec3(a(rng), a(rng), a(rng)), Vec3(a(rng), b(rng), a(rng)));
    const Pose6D q = transform_to_pose(pose_to_transform(p));
    for (int i = 0; i < 6; ++i) CHECK(q.to_array()[i] == doctest::Approx(p.to_array()[i]).epsilon(1e-9));
  }
}

TEST_CASE("Pose6D rejects non-finite components and wraps angles") {
  CHECK(code_of([] { Pose6D(Vec3(0, 0, NAN), Vec3::Zero()); }) == ErrorCode::ParseError);
  const Pose6D p(Vec3::Zero(), Vec3(3 * kPi, 0, 0));
  CHECK(p.euler().x() == doctest::Approx(kPi));
}

TEST_CASE("transform_cloud preserves order and distances") {
  const PointList one{Vec3::Zero()};
  RigidTransform shift;
  shift.t = Vec3(1, 0, 0);
  CHECK(transform_cloud(one, shift)[0] == Vec3(1, 0, 0));

  std::mt19937_64 rng(5);
  const PointList pts = fixtures::random_cloud(rng, 50);
  const RigidTransform T = pose_to_transform(Pose6D(Vec3(1, 2, 3), Vec3(0.4, 0.2, -1.0)));
  const PointList moved = transform_cloud(pts, T);
  const PointList back = transform_cloud(moved, T.inverse());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK((back[i] - pts[i]).norm() < 1e-9);
    CHECK((moved[i] - (T.R * pts[i] + T.t)).norm() == 0.0);
    for (std::size_t j = i + 1; j < pts.size(); j += 7) {
      CHECK(std::abs((moved[i] - moved[j]).norm() - (pts[i] - pts[j]).norm()) < 1e-9);
    }
  }
}

TEST_CASE("farthest_point_sample follows the greedy max-min rule") {
  const PointList line{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(10, 0, 0)};
  // Centroid x = 3.25: nearest is x = 2; the farthest from it is x = 10.
  const auto idx = farthest_point_indices(line, 2);
  CHECK(idx == std::vector<std::size_t>{2, 3});

  // Oracle: explicit greedy loop on a random cloud.
  std::mt19937_64 rng(11);
  const PointList pts = fixtures::random_cloud(rng, 60);
  const auto got = farthest_point_indices(pts, 12);
  const Vec3 c = centroid(pts);
  std::vector<std::size_t> want;
  std::size_t first = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if ((pts[i] - c).norm() < (pts[first] - c).norm()) first = i;
  want.push_back(first);
  while (want.size() < 12) {
    std::size_t best = 0;
    double bd = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double d = 1e300;
      for (auto w : want) d = std::min(d, (pts[i] - pts[w]).norm());
      if (d > bd) {
        bd = d;
        best = i;
      }
    }
    want.push_back(best);
  }
  CHECK(got == want);

  auto all = farthest_point_indices(pts, pts.size());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  CHECK(code_of([&] { farthest_point_indices(pts, 0); }) == ErrorCode::BadCount);
  CHECK(code_of([&] { farthest_point_indices(pts, 61); }) == ErrorCode::BadCount);
}

TEST_CASE("estimate_normals on a plane and a sphere") {
  const PointList patch = fixtures::plane_patch(0, 1, 0, 1, 0, 0.1);
  for (const auto& n : estimate_normals(patch, 8)) {
    CHECK(std::abs(std::abs(n.z()) - 1.0) < 1e-9);
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }

  PointList sphere;
  const int N = 1500;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < N; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / N;
    const double r = std::sqrt(1 - z * z);
    sphere.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  const auto normals = estimate_normals(sphere, 16);
  int good = 0;
  for (int i = 0; i < N; ++i) {
    if (normals[i].dot(sphere[i].normalized()) >= std::cos(10.0 * kPi / 180.0)) ++good;
  }
  CHECK(good >= 0.95 * N);

  CHECK(code_of([&] { estimate_normals(patch, 2); }) == ErrorCode::TooFewPoints);
}

TEST_CASE("support_diameter") {
  const PointList cube = fixtures::box_surface(Vec3::Zero(), Vec3::Ones(), 1.0);
  CHECK(cube.size() == 8);
  CHECK(support_diameter(cube) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(support_diameter(PointList{Vec3(0, 0, 0), Vec3(0, 3, 4)}) == doctest::Approx(5.0));
  CHECK(code_of([] { support_diameter(PointList{Vec3::Zero()}); }) == ErrorCode::TooFewPoints);

  std::mt19937_64 rng(2);
  const PointList pts = fixtures::random_cloud(rng, 40);
  const auto T = pose_to_transform(Pose6D(Vec3(3, 1, -2), Vec3(1.0, 0.3, -2.0)));
  CHECK(std::abs(support_diameter(transform_cloud(pts, T)) - support_diameter(pts)) < 1e-9);
}

TEST_CASE("relative_rotation") {
  RigidTransform a, b;
  a.R = rot_z(kPi / 6);
  b.R = rot_z(kPi / 2);
  const auto rr = relative_rotation(a, b);
  CHECK((rr.R_j_i - rot_z(kPi / 3)).norm() < 1e-12);
  CHECK(rr.angle == doctest::Approx(kPi / 3).epsilon(1e-12));
  CHECK(relative_rotation(a, a).angle == doctest::Approx(0.0));
  RigidTransform flip;
  flip.R = rot_x(kPi);
  CHECK(relative_rotation(flip, RigidTransform{}).angle == doctest::Approx(kPi));
  CHECK(relative_rotation(a, flip).angle == doctest::Approx(relative_rotation(flip, a).angle));
}

TEST_CASE("load_scene resamples with per-label quotas") {
  std::mt19937_64 rng(9);
  RawScene raw;
  raw.object = fixtures::random_cloud(rng, 1024, 0.05);
  raw.support = fixtures::random_cloud(rng, 896, 0.2);
  raw.table = fixtures::random_cloud(rng, 128, 0.5);
  const auto path = temp_file("quota.pts");
  write_pts(path, raw);
  const SegmentedScene s = load_scene(path);
  CHECK(s.size() == 2048);
  CHECK(s.object().size() == 1024);
  CHECK(s.support().size() == 896);
  CHECK(s.table().size() == 128);
  const auto labels = s.labels();
  CHECK(std::count(labels.begin(), labels.end(), Label::Support) == 896);

  // Support-bottom frame: support AABB bottom center at the origin.
  double zmin = 1e9;
  Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
  for (const auto& p : s.support_detail()) {
    zmin = std::min(zmin, p.z());
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  CHECK(zmin == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(0.5 * (lo.x() + hi.x()) == doctest::Approx(0.0));
  CHECK(0.5 * (lo.y() + hi.y()) == doctest::Approx(0.0));

  raw.object.resize(3000, Vec3(0.01, 0.01, 0.01));
  write_pts(path, raw);
  CHECK(load_scene(path).size() == 2048);
  fs::remove(path);
}

TEST_CASE("load_scene errors") {
  const auto path = temp_file("bad.pts");
  CHECK(code_of([&] { load_scene(temp_file("missing.pts")); }) == ErrorCode::MissingFile);

  write_lines(path, "# frame=support_bottom units=m\n0 0 0 0\n1 0 0 1\n0 1 0 7\n");
  CHECK(code_of([&] { load_scene(path); }) == ErrorCode::ParseError);

  write_lines(path, "# frame=support_bottom units=m\n0 0 0 0\n1 0 zz 1\n");
  CHECK(code_of([&] { load_scene(path); }) == ErrorCode::ParseError);

  write_lines(path, "# frame=support_bottom units=m\n0 0 0 2\n1 0 0 2\n");
  CHECK(code_of([&] { load_scene(path); }) == ErrorCode::EmptyClass);
  fs::remove(path);
}

TEST_CASE("pts files round trip") {
  RawScene raw;
  raw.object = {Vec3(0.1, 0.2, 0.3)};
  raw.support = {Vec3(-1.5, 2.25, 0.0), Vec3(1e-7, 3.0, 4.0)};
  raw.table = {Vec3(0, 0, 0)};
  const auto path = temp_file("rt.pts");
  write_pts(path, raw);
  const RawScene back = read_pts(path);
  CHECK(back.object == raw.object);
  CHECK(back.support == raw.support);
  CHECK(back.table == raw.table);
  fs::remove(path);
}
