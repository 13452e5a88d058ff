#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "reorient/error.hpp"
#include "reorient/pipeline.hpp"

using namespace reorient;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("reorient_test_pipeline_" + name);
}

// Cube beside a low block standing on the table.
SegmentedScene block_scene() {
  const PointList block = fixtures::box_surface(Vec3(-0.15, -0.15, 0), Vec3(0.15, 0.15, 0.05), 0.004);
  const PointList table = fixtures::plane_patch(-0.4, 0.4, -0.4, 0.4, 0, 0.02);
  const PointList cube = fixtures::box_surface(Vec3(0.2, 0.2, 0), Vec3(0.32, 0.32, 0.12), 0.01);
  return SegmentedScene::from_clouds(cube, block, table, 1024);
}

}  // namespace

TEST_CASE("sampler kinds and config checks") {
  for (auto k : {SamplerKind::GaussianPrior, SamplerKind::LibraryPrior, SamplerKind::ExternalFile}) {
    CHECK(sampler_kind_from_name(sampler_kind_name(k)) == k);
  }
  CHECK(code_of([] { sampler_kind_from_name("neural"); }) == ErrorCode::BadSamplerConfig);
  SamplerConfig cfg;
  cfg.M = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::BadSamplerConfig);
  PipelineParams p;
  p.s2_min = 1.5;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::BadConfig);
}

TEST_CASE("pose files") {
  const auto path = temp_file("poses.json");
  std::ofstream(path) << R"([[0,0,0.1,0,0,0], {"pose": [0.01,0,0,0,0,1.0]}])";
  const auto poses = read_pose_file(path);
  REQUIRE(poses.size() == 2);
  CHECK(poses[0].translation().z() == doctest::Approx(0.1));
  CHECK(poses[1].euler().z() == doctest::Approx(1.0));

  std::ofstream(path) << R"([[0,0,0.1,0,0]])";
  CHECK(code_of([&] { read_pose_file(path); }) == ErrorCode::ParseError);
  std::ofstream(path) << "not json";
  CHECK(code_of([&] { read_pose_file(path); }) == ErrorCode::ParseError);
  fs::remove(path);
  CHECK(code_of([&] { read_pose_file(path); }) == ErrorCode::BadSamplerSource);
}

TEST_CASE("stage 1 proposals are seeded") {
  const SegmentedScene scene = block_scene();
  const StabilityOracle oracle(scene, StabilityParams{});
  SamplerConfig cfg;
  cfg.M = 16;
  cfg.seed = 5;
  const auto a = propose_stage1(oracle, scene, cfg);
  const auto b = propose_stage1(oracle, scene, cfg, 3);
  REQUIRE(a.size() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].delta == b[i].delta);
    CHECK(a[i].report.score == b[i].report.score);
    CHECK(a[i].stage == 1);
  }
  cfg.seed = 6;
  CHECK_FALSE(propose_stage1(oracle, scene, cfg)[0].delta == a[0].delta);
}

TEST_CASE("external file and library samplers") {
  const SegmentedScene scene = block_scene();
  const StabilityOracle oracle(scene, StabilityParams{});
  const auto path = temp_file("ext.json");
  std::ofstream(path) << R"([[-0.26,-0.26,0.05,0,0,0], [-0.26,-0.26,0.5,0,0,0]])";
  SamplerConfig cfg;
  cfg.kind = SamplerKind::ExternalFile;
  cfg.path = path;
  const auto ext = propose_stage1(oracle, scene, cfg);
  REQUIRE(ext.size() == 2);
  CHECK(ext[0].report.category == Category::Stable);
  CHECK(ext[0].report.afforded_by_support);
  CHECK(ext[1].report.category == Category::Separation);

  cfg.kind = SamplerKind::LibraryPrior;
  cfg.M = 8;
  CHECK(propose_stage1(oracle, scene, cfg).size() == 8);
  std::ofstream(path) << "[]";
  CHECK(code_of([&] { propose_stage1(oracle, scene, cfg); }) == ErrorCode::BadSamplerSource);
  fs::remove(path);
}

TEST_CASE("filter_candidates thresholds, sorts and deduplicates") {
  const PointList base = fixtures::box_surface(Vec3::Zero(), Vec3(0.04, 0.04, 0.04), 0.01);
  const DiversityMetric metric(base, 0.2);
  auto cand = [&](double x, double score) {
    PlacementCandidate c;
    c.delta = Pose6D(Vec3(x, 0, 0), Vec3::Zero());
    RigidTransform T;
    T.t = Vec3(x, 0, 0);
    c.transformed_object = transform_cloud(base, T);
    c.report.score = score;
    return c;
  };
  std::vector<PlacementCandidate> in{cand(0.0, 0.6), cand(0.001, 0.9), cand(0.1, 0.4), cand(0.2, 0.7)};
  in.push_back(cand(0.3, 0.95));
  in.back().error = "E_NO_CONVERGENCE: x";
  const auto out = filter_candidates(in, 0.5, 0.02, metric);
  REQUIRE(out.size() == 2);
  CHECK(out[0].report.score == 0.9);
  CHECK(out[1].report.score == 0.7);
}

TEST_CASE("generate_placements end to end on a small scene") {
  const SegmentedScene scene = block_scene();
  SamplerConfig cfg;
  cfg.M = 48;
  cfg.seed = 3;
  PipelineParams params;
  params.max_refine = 6;
  const auto res = generate_placements(scene, cfg, params);
  CHECK(res.proposed == 48);
  CHECK(res.refined == std::min(res.stage1_kept, params.max_refine) * params.n_seeds);
  CHECK(res.empty_warning == res.placements.empty());
  CHECK(res.placements.size() >= 2);
  const DiversityMetric metric = scene_diversity_metric(scene);
  for (std::size_t i = 0; i < res.placements.size(); ++i) {
    const auto& p = res.placements[i];
    CHECK(p.stage == 2);
    CHECK(p.report.score >= params.s2_min);
    CHECK(p.report.category == Category::Stable);
    if (i > 0) CHECK(p.report.score <= res.placements[i - 1].report.score);
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(metric.distance(p.transformed_object, res.placements[j].transformed_object) > params.delta2);
    }
  }

  params.threads = 2;
  const auto par = generate_placements(scene, cfg, params);
  REQUIRE(par.placements.size() == res.placements.size());
  for (std::size_t i = 0; i < res.placements.size(); ++i) {
    CHECK(par.placements[i].delta == res.placements[i].delta);
  }
}
