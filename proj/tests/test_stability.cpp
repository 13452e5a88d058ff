#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "reorient/error.hpp"
#include "reorient/stability.hpp"

using namespace reorient;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

StabilityParams unit_params() {
  StabilityParams p;
  p.voxel = 0.02;
  p.contact_tol = 0.02;
  return p;
}

// Unit cube resting on a flat table-level plane, centered at the origin.
SegmentedScene cube_on_plane() {
  const PointList plane = fixtures::plane_patch(-1, 1, -1, 1, 0, 0.05);
  return fixtures::exact_scene(fixtures::box_surface(Vec3(-0.5, -0.5, 0), Vec3(0.5, 0.5, 1), 0.05),
                               plane, plane);
}

// Solid block with its top at z = 0.5 and its right edge at x = 0; a unit
// cube lies on top with its centroid `overhang` past the edge.
SegmentedScene cube_on_ledge(double overhang) {
  const PointList block = fixtures::box_surface(Vec3(-1.0, -1.0, 0), Vec3(0, 1.0, 0.5), 0.01);
  const PointList table = fixtures::plane_patch(-1.5, 1.5, -1.5, 1.5, 0, 0.1);
  const Vec3 lo(overhang - 0.5, -0.5, 0.5);
  return fixtures::exact_scene(fixtures::box_surface(lo, lo + Vec3::Ones(), 0.05), block, table);
}

}  // namespace

TEST_CASE("occupancy of a hollow box and of a plane") {
  const Vec3 lo(0, 0, 0), hi(0.3, 0.3, 0.2);
  const OccupancyGrid g = build_occupancy(fixtures::box_surface(lo, hi, 0.0025), 0.005);
  const double v = g.voxel();
  const double interior = static_cast<double>(g.count(VoxelState::Interior)) * v * v * v;
  const double analytic = 0.3 * 0.3 * 0.2;
  CHECK(std::abs(interior - analytic) <= 0.2 * analytic);
  CHECK(g.state_at(Vec3(0.15, 0.15, 0.1)) == VoxelState::Interior);
  CHECK(g.state_at(Vec3(0.5, 0.15, 0.1)) == VoxelState::Free);
  CHECK(g.state_at(Vec3(0.15, 0.15, 0.25)) == VoxelState::Free);

  const OccupancyGrid flat = build_occupancy(fixtures::plane_patch(0, 1, 0, 1, 0, 0.01), 0.01);
  CHECK(flat.count(VoxelState::Interior) == 0);
  CHECK(flat.count(VoxelState::Shell) > 0);
}

TEST_CASE("occupancy errors") {
  const PointList few(5, Vec3::Zero());
  CHECK(code_of([&] { build_occupancy(few, 0.01); }) == ErrorCode::TooFewPoints);
  const PointList box = fixtures::box_surface(Vec3::Zero(), Vec3(0.1, 0.1, 0.1), 0.01);
  CHECK(code_of([&] { build_occupancy(box, 0.0); }) == ErrorCode::BadVoxel);
  CHECK(code_of([&] { build_occupancy(box, 0.05); }) == ErrorCode::BadVoxel);
}

TEST_CASE("penetration report") {
  const OccupancyGrid g = build_occupancy(fixtures::box_surface(Vec3::Zero(), Vec3(0.3, 0.3, 0.2), 0.0025), 0.005);
  const PointList pts{Vec3(0.15, 0.15, 0.1), Vec3(0.5, 0.5, 0.5), Vec3(0.02, 0.15, 0.1), Vec3(1, 1, 1)};
  const auto rep = penetration_report(pts, g);
  CHECK(rep.fraction == doctest::Approx(0.5));
  CHECK(rep.max_depth == doctest::Approx(0.1).epsilon(0.1));
  CHECK(penetration_report(PointList{}, g).fraction == 0.0);
}

TEST_CASE("support margin against the witness hull") {
  const PointList support = fixtures::plane_patch(-0.1, 0.1, -0.1, 0.1, 0.2, 0.01);
  const PointList on_top = fixtures::plane_patch(-0.05, 0.05, -0.05, 0.05, 0.2, 0.01);
  const auto rep = support_margin(on_top, support, 0.0, 0.005);
  CHECK(rep.afforded_by_support);
  CHECK(rep.contacts.size() == on_top.size());
  CHECK(rep.margin == doctest::Approx(0.05).epsilon(1e-6));

  const PointList on_table = fixtures::plane_patch(0.5, 0.6, 0.5, 0.6, 0.0, 0.01);
  const auto t = support_margin(on_table, support, 0.0, 0.005);
  CHECK_FALSE(t.afforded_by_support);
  CHECK(t.margin == doctest::Approx(0.05).epsilon(1e-6));

  const PointList floating = fixtures::plane_patch(0.5, 0.6, 0.5, 0.6, 0.5, 0.01);
  const auto f = support_margin(floating, support, 0.0, 0.005);
  CHECK(f.contacts.empty());
  CHECK(std::isinf(f.margin));
  CHECK(code_of([&] { support_margin(floating, support, 0.0, 0.0); }) == ErrorCode::BadConfig);
}

TEST_CASE("category names round trip") {
  for (auto c : {Category::Stable, Category::Separation, Category::Penetration, Category::UnstableContact}) {
    CHECK(category_from_name(category_name(c)) == c);
  }
  CHECK(category_name(Category::UnstableContact) == "unstable_contact");
  CHECK(code_of([] { category_from_name("wobbly"); }) == ErrorCode::ParseError);
}

TEST_CASE("cube on a plane stays put") {
  const SegmentedScene scene = cube_on_plane();
  const StabilityOracle oracle(scene, unit_params());
  const SettleResult r = oracle.settle(Pose6D());
  CHECK(r.displacement <= 1e-6);
  CHECK(r.rotation <= 1e-6);
  const StabilityReport rep = oracle.classify(Pose6D());
  CHECK(rep.category == Category::Stable);
  CHECK(rep.s_pen == 1.0);
  CHECK(rep.margin == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.s_stab == doctest::Approx(1.0));
}

TEST_CASE("cube past a ledge edge tips over") {
  const SegmentedScene scene = cube_on_ledge(0.001);
  const StabilityOracle oracle(scene, unit_params());
  const SettleResult r = oracle.settle(Pose6D());
  CHECK(r.rotation > 10.0 * kDeg);
  CHECK(oracle.classify(Pose6D()).category == Category::UnstableContact);

  // Same cube well back from the edge rests.
  const StabilityOracle resting(cube_on_ledge(-0.2), unit_params());
  const SettleResult s = resting.settle(Pose6D());
  CHECK(s.rotation <= 1e-6);
  CHECK(s.displacement <= resting.params().stable_offset);
}

TEST_CASE("floating, penetrating and descending objects") {
  const SegmentedScene scene = cube_on_plane();
  const StabilityOracle oracle(scene, unit_params());

  const StabilityReport up = oracle.classify(Pose6D(Vec3(0, 0, 0.5), Vec3::Zero()));
  CHECK(up.category == Category::Separation);
  CHECK(up.s_stab == 0.0);

  const StabilityReport down = oracle.classify(Pose6D(Vec3(0, 0, -0.3), Vec3::Zero()));
  CHECK(down.category == Category::Penetration);
  CHECK(down.s_stab == 0.0);
  CHECK(down.s_pen == 0.0);
  CHECK(code_of([&] { oracle.settle(Pose6D(Vec3(0, 0, -0.3), Vec3::Zero())); }) ==
        ErrorCode::InitialPenetration);

  // A small drop lands back on the plane.
  const SettleResult fall = oracle.settle(Pose6D(Vec3(0, 0, 0.05), Vec3::Zero()));
  CHECK(fall.displacement == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(fall.rotation <= 1e-9);
  for (std::size_t i = 1; i < fall.heights.size(); ++i) CHECK(fall.heights[i] < fall.heights[i - 1]);

  StabilityParams tight = unit_params();
  tight.settle_max_iter = 2;
  const StabilityOracle limited(scene, tight);
  CHECK(code_of([&] { limited.settle(Pose6D(Vec3(0, 0, 0.5), Vec3::Zero())); }) ==
        ErrorCode::NoConvergence);
}

TEST_CASE("settled poses are equilibria") {
  const SegmentedScene scene = cube_on_ledge(0.001);
  const StabilityOracle oracle(scene, unit_params());
  const SettleResult r = oracle.settle(Pose6D());
  const SettleResult again = oracle.settle(r.transform);
  CHECK(again.displacement <= oracle.params().settle_eps);
  CHECK(again.rotation <= oracle.params().settle_eps);
}

TEST_CASE("scores follow the weights") {
  const SegmentedScene scene = cube_on_plane();
  ScoreWeights w;
  w.alpha = 1.0;
  w.beta = 0.0;
  const auto rep = classify_and_score(scene, Pose6D(), w, unit_params());
  CHECK(rep.score == doctest::Approx(rep.s_stab));
  w.alpha = 0.7;
  CHECK(code_of([&] { classify_and_score(scene, Pose6D(), w, unit_params()); }) == ErrorCode::BadConfig);
}
