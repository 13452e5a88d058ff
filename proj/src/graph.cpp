#include "reorient/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "reorient/error.hpp"
#include "reorient/io.hpp"
#include "reorient/parallel.hpp"
#include "reorient/stability.hpp"

namespace reorient {

std::string_view edge_kind_name(EdgeKind k) { return k == EdgeKind::Inter ? "inter" : "intra"; }

EdgeKind edge_kind_from_name(std::string_view s) {
  if (s == "inter") return EdgeKind::Inter;
  if (s == "intra") return EdgeKind::Intra;
  throw Error(ErrorCode::ParseError, "unknown edge kind: " + std::string(s));
}

std::vector<std::vector<std::size_t>> ManipulationGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].a].push_back(e);
    adj[edges[e].b].push_back(e);
  }
  return adj;
}

RigidTransform ManipulationGraph::node_transform(std::size_t id) const {
  return pose_to_transform(nodes.at(id).pose);
}

GraspConfiguration ManipulationGraph::grasp_at(std::size_t edge, std::size_t at) const {
  const GraphEdge& e = edges.at(edge);
  if (at == e.a) return e.grasp;
  if (at != e.b) throw Error(ErrorCode::BadConfig, "node is not an endpoint of the edge");
  const Mat3 R_b_a = node_transform(e.b).R * node_transform(e.a).R.transpose();
  return transfer_grasp(e.grasp, R_b_a);
}

ManipulationGraph build_graph(const std::vector<Pose6D>& poses, const SharedGraspFn& shared,
                              PointList object) {
  ManipulationGraph g;
  g.object = std::move(object);
  g.nodes.push_back({0, poses.empty() ? Pose6D{} : poses[0]});
  if (poses.size() <= 1) return g;

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> node_of(poses.size(), kNone);
  std::vector<std::size_t> pose_of{0};
  node_of[0] = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<GraspConfiguration>> cache;
  auto query = [&](std::size_t i, std::size_t j) -> const std::vector<GraspConfiguration>& {
    auto it = cache.find({i, j});
    if (it == cache.end()) it = cache.emplace(std::make_pair(i, j), shared(i, j)).first;
    return it->second;
  };
  auto add_node = [&](std::size_t p) {
    node_of[p] = g.nodes.size();
    pose_of.push_back(p);
    g.nodes.push_back({g.nodes.size(), poses[p]});
  };

  std::vector<std::size_t> direct;
  for (std::size_t p = 1; p < poses.size(); ++p) {
    const auto& s = query(0, p);
    if (s.empty()) continue;
    add_node(p);
    g.edges.push_back({0, node_of[p], EdgeKind::Inter, s.front()});
    direct.push_back(p);
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t r = 1; r < poses.size(); ++r) {
      if (node_of[r] != kNone) continue;
      std::vector<GraphEdge> links;
      for (std::size_t n = 1; n < g.nodes.size(); ++n) {
        const auto& s = query(pose_of[n], r);
        if (!s.empty()) links.push_back({n, 0, EdgeKind::Intra, s.front()});
      }
      if (links.empty()) continue;
      add_node(r);
      for (auto& e : links) {
        e.b = node_of[r];
        g.edges.push_back(e);
      }
      changed = true;
    }
  }

  for (std::size_t x = 0; x < direct.size(); ++x) {
    for (std::size_t y = x + 1; y < direct.size(); ++y) {
      const auto& s = query(direct[x], direct[y]);
      if (!s.empty()) g.edges.push_back({node_of[direct[x]], node_of[direct[y]], EdgeKind::Intra, s.front()});
    }
  }
  return g;
}

ManipulationGraph build_graph(const SegmentedScene& scene, const std::vector<Pose6D>& placements,
                              const GraspParams& params, unsigned threads) {
  const GraspScene gscene = GraspScene::from_scene(scene);
  const GraspPlanner planner(scene.object(), gscene, params);
  std::vector<Pose6D> poses{Pose6D{}};
  poses.insert(poses.end(), placements.begin(), placements.end());
  std::vector<RigidTransform> T(poses.size());
  std::vector<std::vector<char>> masks(poses.size());
  parallel_for(poses.size(), threads, [&](std::size_t i) {
    T[i] = pose_to_transform(poses[i]);
    masks[i] = planner.feasibility(T[i]);
  });
  return build_graph(
      poses, [&](std::size_t i, std::size_t j) { return planner.shared(masks[i], T[i], masks[j]); },
      scene.object());
}

PlanResult plan(const ManipulationGraph& graph, const std::function<bool(std::size_t)>& goal) {
  const std::size_t n = graph.nodes.size();
  std::vector<char> is_goal(n, 0);
  bool any = false;
  for (std::size_t v = 0; v < n; ++v) any |= (is_goal[v] = goal(v) ? 1 : 0);
  if (!any) throw Error(ErrorCode::NoGoalNode, "no node satisfies the goal");

  auto adj = graph.adjacency();
  auto other = [&](std::size_t e, std::size_t v) {
    return graph.edges[e].a == v ? graph.edges[e].b : graph.edges[e].a;
  };
  for (std::size_t v = 0; v < n; ++v) {
    std::stable_sort(adj[v].begin(), adj[v].end(), [&](std::size_t x, std::size_t y) {
      return other(x, v) < other(y, v);
    });
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kNone), via(n, kNone);
  std::deque<std::size_t> queue{0};
  dist[0] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : adj[v]) {
      const std::size_t w = other(e, v);
      if (dist[w] != kNone) continue;
      dist[w] = dist[v] + 1;
      via[w] = e;
      queue.push_back(w);
    }
  }
  std::size_t best = kNone;
  for (std::size_t v = 0; v < n; ++v) {
    if (is_goal[v] && dist[v] != kNone && (best == kNone || dist[v] < dist[best])) best = v;
  }
  if (best == kNone) throw Error(ErrorCode::NoPath, "goal not reachable from the initial scene");

  PlanResult res;
  for (std::size_t v = best; v != 0; v = other(via[v], v)) {
    res.edges.push_back(via[v]);
    res.nodes.push_back(v);
  }
  res.nodes.push_back(0);
  std::reverse(res.edges.begin(), res.edges.end());
  std::reverse(res.nodes.begin(), res.nodes.end());
  return res;
}

PlanResult plan(const ManipulationGraph& graph, std::size_t goal_node) {
  if (goal_node >= graph.nodes.size()) {
    throw Error(ErrorCode::NoGoalNode, "goal node " + std::to_string(goal_node) + " not in graph");
  }
  return plan(graph, [goal_node](std::size_t v) { return v == goal_node; });
}

std::function<bool(std::size_t)> grasp_goal(const ManipulationGraph& graph,
                                            const GraspConfiguration& target,
                                            const GraspScene& scene, const GraspParams& params) {
  const std::size_t m = graph.object.size();
  if (target.ix >= m || target.iy >= m || target.ix == target.iy) {
    throw Error(ErrorCode::BadConfig, "target grasp indices out of range");
  }
  std::vector<char> ok(graph.nodes.size(), 0);
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
    const RigidTransform T = graph.node_transform(v);
    const PointList posed = transform_cloud(graph.object, T);
    ok[v] = grasp_feasible(transfer_grasp(target, T.R), posed, scene, params.gripper,
                           params.workspace) == GraspReject::None;
  }
  return [ok](std::size_t v) { return v < ok.size() && ok[v]; };
}

std::string_view primitive_kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::PickUp: return "pick_up";
    case PrimitiveKind::Transit: return "transit";
    case PrimitiveKind::PlaceDown: return "place_down";
  }
  return "unknown";
}

PrimitiveKind primitive_kind_from_name(std::string_view s) {
  if (s == "pick_up") return PrimitiveKind::PickUp;
  if (s == "transit") return PrimitiveKind::Transit;
  if (s == "place_down") return PrimitiveKind::PlaceDown;
  throw Error(ErrorCode::ParseError, "unknown primitive kind: " + std::string(s));
}

MotionProgram expand_primitives(const PlanResult& plan, const ManipulationGraph& graph, double h,
                                double opening) {
  MotionProgram prog;
  prog.edges = plan.edges;
  if (plan.edges.empty()) return prog;
  if (graph.object.empty()) throw Error(ErrorCode::BadConfig, "graph has no object cloud");
  auto make = [&](std::size_t e, std::size_t node, double lift, bool closed, const char* tag,
                  PrimitiveKind kind) {
    Waypoint w;
    w.grasp = graph.grasp_at(e, node);
    w.node_pose = graph.nodes.at(node).pose;
    w.gripper = grasp_frame(w.grasp, transform_cloud(graph.object, graph.node_transform(node)));
    w.gripper.t.z() += lift;
    w.closed = closed;
    w.opening = closed ? w.grasp.width : opening;
    w.tag = tag;
    w.kind = kind;
    w.node = node;
    w.edge = e;
    w.lift = lift;
    prog.waypoints.push_back(w);
  };
  for (std::size_t k = 0; k < plan.edges.size(); ++k) {
    const std::size_t e = plan.edges[k];
    const std::size_t u = plan.nodes.at(k);
    const std::size_t v = plan.nodes.at(k + 1);
    make(e, u, h, false, "pre_grasp", PrimitiveKind::PickUp);
    make(e, u, 0.0, false, "grasp", PrimitiveKind::PickUp);
    make(e, u, 0.0, true, "close", PrimitiveKind::PickUp);
    make(e, u, h, true, "lift", PrimitiveKind::Transit);
    make(e, v, h, true, "pre_place", PrimitiveKind::PlaceDown);
    make(e, v, 0.0, true, "place", PrimitiveKind::PlaceDown);
    make(e, v, h, false, "retreat", PrimitiveKind::PlaceDown);
  }
  return prog;
}

std::vector<Violation> validate_plan(const MotionProgram& program, const SegmentedScene& scene,
                                     const GraspParams& params) {
  std::vector<Violation> out;
  if (program.waypoints.empty()) return out;
  const GraspScene gscene = GraspScene::from_scene(scene);
  const StabilityOracle oracle(scene, {});
  const PointList& object = scene.object();
  for (std::size_t k = 0; k < program.waypoints.size(); ++k) {
    const Waypoint& w = program.waypoints[k];
    const GraspConfiguration& g = w.grasp;
    if (g.ix >= object.size() || g.iy >= object.size()) {
      throw Error(ErrorCode::BadConfig, "waypoint grasp indices out of range");
    }
    const PointList posed = transform_cloud(object, pose_to_transform(w.node_pose));
    bool hit = false;
    for (const Box& box : params.gripper.boxes(g.width, w.closed ? g.width : w.opening)) {
      hit = hit || gscene.box_collides(box, w.gripper) ||
            (!w.closed && object_in_box(box, w.gripper, posed, posed[g.ix], posed[g.iy],
                                        params.gripper.clearance));
    }
    if (hit) out.push_back({k, "collision"});
    if (w.closed) {
      const RigidTransform carry = w.gripper * grasp_frame(g, posed).inverse();
      const PointList carried = transform_cloud(posed, carry);
      if (oracle.penetration_fraction(carried) > oracle.params().pen_tol) {
        out.push_back({k, "object_collision"});
      }
    }
    if (!params.workspace.reachable(w.gripper.t, w.gripper.R.col(2))) {
      out.push_back({k, "unreachable"});
    }
  }
  return out;
}

nlohmann::json grasp_to_json(const GraspConfiguration& g) {
  return {{"ix", g.ix}, {"iy", g.iy}, {"d", vec3_to_json(g.d)}, {"width", g.width}};
}

GraspConfiguration grasp_from_json(const nlohmann::json& j) {
  try {
    GraspConfiguration g;
    g.ix = j.at("ix").get<std::size_t>();
    g.iy = j.at("iy").get<std::size_t>();
    g.d = vec3_from_json(j.at("d"));
    g.width = j.at("width").get<double>();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad grasp record: ") + e.what());
  }
}

nlohmann::json graph_to_json(const ManipulationGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes) nodes.push_back({{"id", n.id}, {"pose", pose_to_json(n.pose)}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    nlohmann::json g = grasp_to_json(e.grasp);
    g["node_i"] = e.a;
    g["node_j"] = e.b;
    edges.push_back({{"a", e.a}, {"b", e.b}, {"kind", std::string(edge_kind_name(e.kind))}, {"grasp", g}});
  }
  nlohmann::json object = nlohmann::json::array();
  for (const auto& p : graph.object) object.push_back(vec3_to_json(p));
  return {{"nodes", nodes}, {"edges", edges}, {"object", object}};
}

ManipulationGraph graph_from_json(const nlohmann::json& j) {
  ManipulationGraph g;
  try {
    for (const auto& n : j.at("nodes")) {
      g.nodes.push_back({n.at("id").get<std::size_t>(), pose_from_json(n.at("pose"))});
    }
    for (const auto& e : j.at("edges")) {
      g.edges.push_back({e.at("a").get<std::size_t>(), e.at("b").get<std::size_t>(),
                         edge_kind_from_name(e.at("kind").get<std::string>()),
                         grasp_from_json(e.at("grasp"))});
    }
    if (j.contains("object")) {
      for (const auto& p : j.at("object")) g.object.push_back(vec3_from_json(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad graph document: ") + e.what());
  }
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    if (g.nodes[k].id != k) throw Error(ErrorCode::ParseError, "node ids must be 0..n-1 in order");
  }
  if (g.nodes.empty()) throw Error(ErrorCode::ParseError, "graph has no initial node");
  for (const auto& e : g.edges) {
    if (e.a >= g.nodes.size() || e.b >= g.nodes.size()) {
      throw Error(ErrorCode::ParseError, "edge references a missing node");
    }
  }
  return g;
}

void export_graph(const ManipulationGraph& graph, const std::filesystem::path& path) {
  write_text(path, graph_to_json(graph).dump() + "\n");
}

ManipulationGraph import_graph(const std::filesystem::path& path) {
  return graph_from_json(read_json(path));
}

nlohmann::json program_to_json(const MotionProgram& program) {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : program.waypoints) {
    wps.push_back({{"pose", pose_to_json(transform_to_pose(w.gripper))},
                   {"fingers", w.closed ? "closed" : "open"},
                   {"opening", w.opening},
                   {"tag", w.tag},
                   {"kind", std::string(primitive_kind_name(w.kind))},
                   {"node", w.node},
                   {"edge", w.edge},
                   {"lift", w.lift},
                   {"node_pose", pose_to_json(w.node_pose)},
                   {"grasp", grasp_to_json(w.grasp)}});
  }
  return {{"edges", program.edges}, {"waypoints", wps}};
}

MotionProgram program_from_json(const nlohmann::json& j) {
  MotionProgram prog;
  try {
    prog.edges = j.at("edges").get<std::vector<std::size_t>>();
    for (const auto& r : j.at("waypoints")) {
      Waypoint w;
      w.gripper = pose_to_transform(pose_from_json(r.at("pose")));
      const std::string fingers = r.at("fingers").get<std::string>();
      if (fingers != "open" && fingers != "closed") {
        throw Error(ErrorCode::ParseError, "fingers must be open or closed");
      }
      w.closed = fingers == "closed";
      w.opening = r.at("opening").get<double>();
      w.tag = r.at("tag").get<std::string>();
      w.kind = primitive_kind_from_name(r.at("kind").get<std::string>());
      w.node = r.at("node").get<std::size_t>();
      w.edge = r.at("edge").get<std::size_t>();
      w.lift = r.at("lift").get<double>();
      w.node_pose = pose_from_json(r.at("node_pose"));
      w.grasp = grasp_from_json(r.at("grasp"));
      prog.waypoints.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad plan document: ") + e.what());
  }
  return prog;
}

}  // namespace reorient
