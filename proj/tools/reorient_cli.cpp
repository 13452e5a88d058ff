#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reorient/config.hpp"
#include "reorient/dataset.hpp"
#include "reorient/error.hpp"
#include "reorient/graph.hpp"
#include "reorient/io.hpp"
#include "reorient/parallel.hpp"
#include "reorient/pipeline.hpp"

namespace fs = std::filesystem;
using namespace reorient;

namespace {

constexpr std::uint64_t kStreamGenPairs = 0x5041495253ull;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
  bool dump_config = false;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  cfg.sampler.seed = cfg.seed;
  cfg.pipeline.threads = cfg.threads;
  cfg.grasp.workspace.lift = cfg.h;
  return cfg;
}

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << msg << "\n";
}

std::vector<PrimitivePairSpec> read_pair_specs(const fs::path& path) {
  const nlohmann::json doc = read_json(path);
  const nlohmann::json& arr = doc.is_object() && doc.contains("pairs") ? doc.at("pairs") : doc;
  if (!arr.is_array()) throw Error(ErrorCode::BadSpec, path.string() + ": expected an array of pairs");
  std::vector<PrimitivePairSpec> specs;
  for (const auto& rec : arr) specs.push_back(rec.get<PrimitivePairSpec>());
  for (const auto& s : specs) s.validate();
  return specs;
}

int cmd_gen_pairs(const Common& c, const fs::path& spec_path, const fs::path& out) {
  const RunConfig cfg = resolve(c);
  const auto specs = read_pair_specs(spec_path);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!fs::is_directory(out)) throw Error(ErrorCode::IoError, "cannot create " + out.string());
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const std::uint64_t ps = derived_rng(cfg.seed, kStreamGenPairs, i)();
    const fs::path dir = out / spec.id;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
    const PrimitivePair pair = make_primitive_pair(spec, ps);
    write_pts(dir / "scene.pts", compose_scene(spec, pair, ps));
    nlohmann::json j = spec;
    write_text(dir / "spec.json", j.dump(2) + "\n");
    index.push_back(j);
    log(c, "pair " + spec.id + ": " + std::to_string(pair.object.size()) + " object, " +
               std::to_string(pair.support.size()) + " support points");
  }
  write_text(out / "pairs.json", index.dump(2) + "\n");
  return 0;
}

int cmd_gen_dataset(const Common& c, const fs::path& pairs_dir, std::optional<std::size_t> drops,
                    std::optional<std::size_t> inits, const fs::path& out) {
  const RunConfig cfg = resolve(c);
  const auto specs = read_pair_specs(pairs_dir / "pairs.json");
  std::vector<std::pair<std::string, fs::path>> scenes;
  for (const auto& s : specs) scenes.emplace_back(s.id, pairs_dir / s.id / "scene.pts");
  DatasetParams params;
  params.n_drop = drops.value_or(cfg.n_drop);
  params.n_init = inits.value_or(cfg.n_init);
  if (params.n_drop < 1 || params.n_init < 1) {
    throw Error(ErrorCode::BadConfig, "--drops and --inits must be at least 1");
  }
  params.seed = cfg.seed;
  params.sweep = cfg.sweep;
  params.stability = cfg.stability;
  params.threads = cfg.threads;
  const nlohmann::json manifest = build_dataset_from_scenes(scenes, out, params);
  log(c, manifest.dump(2));
  return 0;
}

int cmd_propose(const Common& c, const fs::path& scene_path, const std::string& sampler,
                const std::string& proposals, const fs::path& out) {
  RunConfig cfg = resolve(c);
  if (!sampler.empty()) {
    try {
      cfg.sampler.kind = sampler_kind_from_name(sampler);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadSamplerConfig, e.what());
    }
  }
  if (!proposals.empty()) cfg.sampler.path = proposals;
  const SegmentedScene scene = load_scene(scene_path, cfg.scene_size);
  const PipelineResult res = generate_placements(scene, cfg.sampler, cfg.pipeline, cfg.stability);
  write_text(out, placements_to_json(res).dump(2) + "\n");
  log(c, "proposed " + std::to_string(res.proposed) + ", stage 1 kept " +
             std::to_string(res.stage1_kept) + ", refined " + std::to_string(res.refined) +
             ", placements " + std::to_string(res.placements.size()));
  if (res.empty_warning) std::cerr << "warning: no placement passed the final gate\n";
  return 0;
}

int cmd_build_graph(const Common& c, const fs::path& scene_path, const fs::path& placements,
                    const fs::path& out) {
  const RunConfig cfg = resolve(c);
  const SegmentedScene scene = load_scene(scene_path, cfg.scene_size);
  const auto poses = placements_from_json(read_json(placements));
  const ManipulationGraph g = build_graph(scene, poses, cfg.grasp, cfg.threads);
  export_graph(g, out);
  log(c, "graph: " + std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) +
             " edges");
  return 0;
}

int cmd_plan(const Common& c, const fs::path& graph_path, std::optional<std::size_t> goal_node,
             const std::string& goal_grasp, const std::string& scene_path, const fs::path& out) {
  const RunConfig cfg = resolve(c);
  const ManipulationGraph g = import_graph(graph_path);
  PlanResult p;
  if (goal_node) {
    p = plan(g, *goal_node);
  } else {
    if (scene_path.empty()) throw Error(ErrorCode::BadConfig, "--goal-grasp needs --scene");
    const SegmentedScene scene = load_scene(scene_path, cfg.scene_size);
    const GraspScene gscene = GraspScene::from_scene(scene);
    const GraspConfiguration target = grasp_from_json(read_json(goal_grasp));
    p = plan(g, grasp_goal(g, target, gscene, cfg.grasp));
  }
  const MotionProgram prog = expand_primitives(p, g, cfg.h, cfg.effective_opening());
  nlohmann::json j = program_to_json(prog);
  j["nodes"] = p.nodes;
  write_text(out, j.dump(2) + "\n");
  log(c, "plan: " + std::to_string(p.edges.size()) + " edges, " +
             std::to_string(prog.waypoints.size()) + " waypoints");
  return 0;
}

int cmd_validate(const Common& c, const fs::path& plan_path, const fs::path& scene_path,
                 const std::string& out) {
  const RunConfig cfg = resolve(c);
  const SegmentedScene scene = load_scene(scene_path, cfg.scene_size);
  const MotionProgram prog = program_from_json(read_json(plan_path));
  const auto violations = validate_plan(prog, scene, cfg.grasp);
  nlohmann::json report = nlohmann::json::array();
  for (const auto& v : violations) report.push_back({{"waypoint", v.waypoint}, {"reason", v.reason}});
  const nlohmann::json doc{{"waypoints", prog.waypoints.size()}, {"violations", report}};
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text(out, doc.dump(2) + "\n");
  }
  if (!violations.empty()) {
    std::cerr << "E_PLAN_VIOLATION: " << violations.size() << " waypoint violation(s)\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable placement generation and regrasp planning"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Seed for all randomness");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", common.verbose, "Progress on stderr");
  app.add_flag("--dump-config", common.dump_config, "Print the resolved configuration and exit");

  fs::path spec_path, out, pairs_dir, scene_path, placements_path, graph_path, plan_path;
  std::optional<std::size_t> drops, inits, goal_node;
  std::string sampler, proposals, goal_grasp, plan_scene, report_out;

  auto* gen_pairs = app.add_subcommand("gen-pairs", "Generate procedural object/support scenes");
  gen_pairs->add_option("--spec", spec_path, "Pair specification JSON")->required()->check(CLI::ExistingFile);
  gen_pairs->add_option("--out", out, "Output directory")->required();

  auto* gen_dataset = app.add_subcommand("gen-dataset", "Label variation sweeps around stable poses");
  gen_dataset->add_option("--pairs", pairs_dir, "Directory written by gen-pairs")->required()->check(CLI::ExistingDirectory);
  gen_dataset->add_option("--drops", drops, "Drop trials per pair");
  gen_dataset->add_option("--inits", inits, "Initial table poses per pair");
  gen_dataset->add_option("--out", out, "Output directory")->required();

  auto* propose = app.add_subcommand("propose", "Generate stable placements for a scene");
  propose->add_option("--scene", scene_path, "Scene .pts file")->required()->check(CLI::ExistingFile);
  propose->add_option("--sampler", sampler, "gaussian_prior, library_prior or external_file");
  propose->add_option("--proposals", proposals, "Library or proposal pose file");
  propose->add_option("--out", out, "Placements JSON")->required();

  auto* graph = app.add_subcommand("build-graph", "Build the manipulation graph");
  graph->add_option("--scene", scene_path, "Scene .pts file")->required()->check(CLI::ExistingFile);
  graph->add_option("--placements", placements_path, "Placements JSON")->required()->check(CLI::ExistingFile);
  graph->add_option("--out", out, "Graph JSON")->required();

  auto* plan_cmd = app.add_subcommand("plan", "Plan a regrasp sequence");
  plan_cmd->add_option("--graph", graph_path, "Graph JSON")->required()->check(CLI::ExistingFile);
  auto* gn = plan_cmd->add_option("--goal-node", goal_node, "Goal node id");
  auto* gg = plan_cmd->add_option("--goal-grasp", goal_grasp, "Target grasp JSON")->check(CLI::ExistingFile);
  gn->excludes(gg);
  plan_cmd->add_option("--scene", plan_scene, "Scene .pts file (for --goal-grasp)")->check(CLI::ExistingFile);
  plan_cmd->add_option("--out", out, "Plan JSON")->required();

  auto* validate = app.add_subcommand("validate", "Check a plan's waypoints");
  validate->add_option("--plan", plan_path, "Plan JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--scene", scene_path, "Scene .pts file")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", report_out, "Report JSON (default stdout)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (app.get_subcommands().empty() && !common.dump_config) {
      throw CLI::RequiredError("a subcommand");
    }
    if (plan_cmd->parsed() && !goal_node && goal_grasp.empty()) {
      throw CLI::RequiredError("--goal-node or --goal-grasp");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (common.dump_config) {
      std::cout << resolve(common).to_json().dump(2) << "\n";
      return 0;
    }
    if (gen_pairs->parsed()) return cmd_gen_pairs(common, spec_path, out);
    if (gen_dataset->parsed()) return cmd_gen_dataset(common, pairs_dir, drops, inits, out);
    if (propose->parsed()) return cmd_propose(common, scene_path, sampler, proposals, out);
    if (graph->parsed()) return cmd_build_graph(common, scene_path, placements_path, out);
    if (plan_cmd->parsed()) return cmd_plan(common, graph_path, goal_node, goal_grasp, plan_scene, out);
    if (validate->parsed()) return cmd_validate(common, plan_path, scene_path, report_out);
  } catch (const Error& e) {
    std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
