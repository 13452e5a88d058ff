#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reorient/grasp.hpp"
#include "reorient/scene.hpp"

namespace reorient {

enum class EdgeKind { Inter, Intra };

std::string_view edge_kind_name(EdgeKind k);
EdgeKind edge_kind_from_name(std::string_view s);

/// Node 0 is the initial scene (identity pose); other nodes are placements,
/// with `pose` the delta applied to the initial object cloud.
struct GraphNode {
  std::size_t id = 0;
  Pose6D pose;

  bool operator==(const GraphNode&) const = default;
};

/// Edge between nodes a and b; the grasp direction is expressed at node a.
struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  EdgeKind kind = EdgeKind::Intra;
  GraspConfiguration grasp;

  bool operator==(const GraphEdge&) const = default;
};

struct ManipulationGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  /// Initial object cloud (the index space of every grasp).
  PointList object;

  /// Edge indices incident to each node, ascending.
  std::vector<std::vector<std::size_t>> adjacency() const;
  RigidTransform node_transform(std::size_t id) const;
  /// Edge grasp expressed at node `at` (one of its endpoints).
  GraspConfiguration grasp_at(std::size_t edge, std::size_t at) const;

  bool operator==(const ManipulationGraph&) const = default;
};

/// Shared grasps between pose i and pose j (indices into the pose list,
/// 0 = initial), expressed at pose i.
using SharedGraspFn =
    std::function<std::vector<GraspConfiguration>(std::size_t i, std::size_t j)>;

/// Graph building over poses[0] (initial, identity) and the placements
/// poses[1..]. Placements sharing a grasp with the initial scene join with an
/// inter edge; the rest join, in repeated passes until nothing changes, when
/// they share a grasp with an existing node; finally the directly linked
/// placements are connected among themselves. One edge (the first shared
/// grasp) per connected pair.
ManipulationGraph build_graph(const std::vector<Pose6D>& poses, const SharedGraspFn& shared,
                              PointList object = {});

/// Graph over the scene's initial object and `placements`.
ManipulationGraph build_graph(const SegmentedScene& scene, const std::vector<Pose6D>& placements,
                              const GraspParams& params, unsigned threads = 1);

struct PlanResult {
  std::vector<std::size_t> edges;  ///< edge indices in travel order
  std::vector<std::size_t> nodes;  ///< visited nodes, starting at 0
};

/// Fewest-edge path from node 0 to the nearest node accepted by `goal`
/// (breadth-first, ties by smallest node id). Throws NoGoalNode when no node
/// is accepted and NoPath when none is reachable.
PlanResult plan(const ManipulationGraph& graph, const std::function<bool(std::size_t)>& goal);
PlanResult plan(const ManipulationGraph& graph, std::size_t goal_node);

/// Goal predicate: nodes where `target` (expressed at node 0) transferred to
/// the node is feasible.
std::function<bool(std::size_t)> grasp_goal(const ManipulationGraph& graph,
                                            const GraspConfiguration& target,
                                            const GraspScene& scene, const GraspParams& params);

enum class PrimitiveKind { PickUp, Transit, PlaceDown };

std::string_view primitive_kind_name(PrimitiveKind k);
PrimitiveKind primitive_kind_from_name(std::string_view s);

struct Waypoint {
  RigidTransform gripper;  ///< gripper-to-world
  bool closed = false;
  double opening = 0.0;    ///< finger separation
  std::string tag;
  PrimitiveKind kind = PrimitiveKind::PickUp;
  std::size_t node = 0;    ///< node whose object pose the grasp refers to
  std::size_t edge = 0;
  double lift = 0.0;       ///< height above the grasp pose
  Pose6D node_pose;        ///< object pose delta at `node`
  GraspConfiguration grasp;  ///< edge grasp expressed at `node`
};

struct MotionProgram {
  std::vector<std::size_t> edges;
  std::vector<Waypoint> waypoints;
};

/// Per edge: pick up at the source node (above, at grasp open, closed), lift
/// by h, then place down at the destination (above closed, at grasp, above
/// open).
MotionProgram expand_primitives(const PlanResult& plan, const ManipulationGraph& graph, double h,
                                double opening);

struct Violation {
  std::size_t waypoint = 0;
  std::string reason;  ///< collision, object_collision, unreachable

  bool operator==(const Violation&) const = default;
};

/// Waypoint checks: open grippers against the node's object, support and
/// table; closed grippers against support and table, with the carried object
/// against support and table; every waypoint against the workspace. The
/// object cloud is the scene's initial object.
std::vector<Violation> validate_plan(const MotionProgram& program, const SegmentedScene& scene,
                                     const GraspParams& params);

nlohmann::json graph_to_json(const ManipulationGraph& graph);
ManipulationGraph graph_from_json(const nlohmann::json& j);
void export_graph(const ManipulationGraph& graph, const std::filesystem::path& path);
ManipulationGraph import_graph(const std::filesystem::path& path);

nlohmann::json grasp_to_json(const GraspConfiguration& g);
GraspConfiguration grasp_from_json(const nlohmann::json& j);

nlohmann::json program_to_json(const MotionProgram& program);
MotionProgram program_from_json(const nlohmann::json& j);

}  // namespace reorient
