#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "reorient/config.hpp"
#include "reorient/error.hpp"
#include "reorient/io.hpp"

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

}  // namespace

TEST_CASE("defaults round trip through json") {
  const RunConfig def;
  CHECK_NOTHROW(def.validate());
  CHECK(RunConfig::from_json(def.to_json()) == def);
  CHECK(def.effective_opening() == def.grasp.gripper.max_opening);
}

TEST_CASE("partial documents override only what they name") {
  const auto j = nlohmann::json::parse(R"({
    "seed": 11,
    "sampler": {"M": 64, "kind": "library_prior"},
    "grasp": {"max_opening": 0.14, "workspace_base": [0.1, 0.2, 0.3]},
    "plan": {"opening": 0.1}
  })");
  const RunConfig cfg = RunConfig::from_json(j);
  CHECK(cfg.seed == 11);
  CHECK(cfg.sampler.M == 64);
  CHECK(cfg.sampler.kind == SamplerKind::LibraryPrior);
  CHECK(cfg.grasp.gripper.max_opening == 0.14);
  CHECK(cfg.grasp.workspace.base == Vec3(0.1, 0.2, 0.3));
  CHECK(cfg.effective_opening() == 0.1);
  CHECK(cfg.pipeline.s2_min == RunConfig{}.pipeline.s2_min);
  CHECK(RunConfig::from_json(cfg.to_json()) == cfg);
}

TEST_CASE("bad documents are rejected") {
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::parse(R"({"sed": 1})")); }) == ErrorCode::BadConfig);
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::parse(R"({"sampler": {"Mx": 1}})")); }) ==
        ErrorCode::BadConfig);
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::parse(R"({"seed": "one"})")); }) ==
        ErrorCode::BadConfig);
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::parse(R"({"sampler": {"kind": "neural"}})")); }) !=
        ErrorCode::IoError);
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::parse("[1, 2]")); }) == ErrorCode::BadConfig);

  RunConfig cfg;
  cfg.threads = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::BadConfig);
  cfg = RunConfig{};
  cfg.h = -0.1;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::BadConfig);
}

TEST_CASE("loading from disk") {
  const fs::path p = fs::temp_directory_path() / "reorient_test_config.json";
  std::ofstream(p) << R"({"threads": 3})";
  CHECK(RunConfig::load(p).threads == 3);
  std::ofstream(p) << "{ nope";
  CHECK(code_of([&] { RunConfig::load(p); }) == ErrorCode::BadConfig);
  fs::remove(p);
  CHECK(code_of([&] { RunConfig::load(p); }) == ErrorCode::MissingFile);
}

TEST_CASE("placements json") {
  PipelineResult res;
  res.proposed = 4;
  PlacementCandidate c;
  c.delta = Pose6D(Vec3(0.1, 0.2, 0.3), Vec3(0.4, 0.5, 0.6));
  c.stage = 2;
  c.report.category = Category::Stable;
  c.report.score = 0.995;
  res.placements.push_back(c);
  const auto j = placements_to_json(res);
  CHECK(j["proposed"] == 4);
  CHECK(j["placements"][0]["category"] == "stable");
  CHECK(j["placements"][0]["margin"].is_null());
  const auto poses = placements_from_json(j);
  REQUIRE(poses.size() == 1);
  CHECK(poses[0] == c.delta);
}
