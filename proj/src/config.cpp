#include "reorient/config.hpp"

#include <set>
#include <string>
#include <type_traits>

#include "reorient/error.hpp"
#include "reorient/io.hpp"

namespace reorient {

namespace {

template <typename V>
void visit_fields(RunConfig& c, V&& v) {
  v("", "seed", c.seed);
  v("", "threads", c.threads);
  v("", "scene_size", c.scene_size);

  auto& s = c.stability;
  v("stability", "voxel", s.voxel);
  v("stability", "contact_tol", s.contact_tol);
  v("stability", "pen_tol", s.pen_tol);
  v("stability", "pen_ref", s.pen_ref);
  v("stability", "margin_ref", s.margin_ref);
  v("stability", "max_pen", s.max_pen);
  v("stability", "settle_eps", s.settle_eps);
  v("stability", "settle_max_iter", s.settle_max_iter);
  v("stability", "settle_dtheta", s.settle_dtheta);
  v("stability", "settle_refinements", s.settle_refinements);
  v("stability", "stable_offset", s.stable_offset);
  v("stability", "stable_rotation", s.stable_rotation);
  v("stability", "probe_limit", s.probe_limit);
  v("stability", "alpha", s.weights.alpha);
  v("stability", "beta", s.weights.beta);

  v("sampler", "kind", c.sampler.kind);
  v("sampler", "M", c.sampler.M);
  v("sampler", "translation_spread", c.sampler.translation_spread);
  v("sampler", "orientation_spread", c.sampler.orientation_spread);

  auto& p = c.pipeline;
  v("pipeline", "s1_min", p.s1_min);
  v("pipeline", "delta1", p.delta1);
  v("pipeline", "s2_min", p.s2_min);
  v("pipeline", "delta2", p.delta2);
  v("pipeline", "n_seeds", p.n_seeds);
  v("pipeline", "max_refine", p.max_refine);
  v("pipeline", "jitter_orientation", p.jitter_orientation);
  v("pipeline", "jitter_translation", p.jitter_translation);
  v("pipeline", "step_angle", p.step_angle);
  v("pipeline", "step_z", p.step_z);
  v("pipeline", "min_step_angle", p.min_step_angle);
  v("pipeline", "min_step_z", p.min_step_z);
  v("pipeline", "max_evaluations", p.max_evaluations);

  v("dataset", "n_drop", c.n_drop);
  v("dataset", "n_init", c.n_init);
  v("dataset", "sweep_dt", c.sweep.dt);
  v("dataset", "sweep_dtheta", c.sweep.dtheta);
  v("dataset", "sweep_k", c.sweep.k);

  auto& g = c.grasp;
  v("grasp", "friction", g.friction);
  v("grasp", "k_dirs", g.k_dirs);
  v("grasp", "max_pairs", g.max_pairs);
  v("grasp", "normal_k", g.normal_k);
  v("grasp", "max_opening", g.gripper.max_opening);
  v("grasp", "finger_length", g.gripper.finger_length);
  v("grasp", "finger_thickness", g.gripper.finger_thickness);
  v("grasp", "finger_width", g.gripper.finger_width);
  v("grasp", "palm_depth", g.gripper.palm_depth);
  v("grasp", "clearance", g.gripper.clearance);
  v("grasp", "workspace_base", g.workspace.base);
  v("grasp", "r_min", g.workspace.r_min);
  v("grasp", "r_max", g.workspace.r_max);
  v("grasp", "min_elevation", g.workspace.min_elevation);

  v("plan", "h", c.h);
  v("plan", "opening", c.opening);
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

template <typename T>
nlohmann::json dump_value(const T& x) {
  if constexpr (std::is_same_v<T, Vec3>) {
    return vec3_to_json(x);
  } else if constexpr (std::is_same_v<T, SamplerKind>) {
    return std::string(sampler_kind_name(x));
  } else {
    return x;
  }
}

template <typename T>
void load_value(const nlohmann::json& j, const std::string& key, T& x) {
  if constexpr (std::is_same_v<T, Vec3>) {
    try {
      x = vec3_from_json(j);
    } catch (const Error&) {
      bad(key + ": expected 3 numbers");
    }
  } else if constexpr (std::is_same_v<T, SamplerKind>) {
    if (!j.is_string()) bad(key + ": expected a string");
    try {
      x = sampler_kind_from_name(j.get<std::string>());
    } catch (const Error& e) {
      bad(key + ": " + e.what());
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) bad(key + ": expected a number");
    x = j.get<T>();
  } else {
    if (!j.is_number_integer()) bad(key + ": expected an integer");
    if (std::is_unsigned_v<T> && j.is_number_integer() && !j.is_number_unsigned()) {
      bad(key + ": expected a non-negative integer");
    }
    x = j.get<T>();
  }
}

}  // namespace

void RunConfig::validate() const {
  try {
    stability.validate();
    sampler.validate();
    pipeline.validate();
    grasp.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadConfig) throw;
    bad(e.what());
  }
  if (threads < 1) bad("threads must be at least 1");
  if (scene_size < 16) bad("scene_size must be at least 16");
  if (n_drop < 1 || n_init < 1) bad("dataset counts must be at least 1");
  if (!(sweep.dt > 0.0) || !(sweep.dtheta > 0.0) || sweep.k < 0) bad("sweep steps out of range");
  if (!(h > 0.0)) bad("h must be positive");
  if (!(opening >= 0.0) || opening > grasp.gripper.max_opening) {
    bad("opening must lie in [0, max_opening]");
  }
}

nlohmann::json RunConfig::to_json() const {
  RunConfig copy = *this;
  nlohmann::json j = nlohmann::json::object();
  visit_fields(copy, [&](const std::string& sec, const std::string& key, const auto& x) {
    if (sec.empty()) {
      j[key] = dump_value(x);
    } else {
      j[sec][key] = dump_value(x);
    }
  });
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("config must be a JSON object");
  RunConfig c;
  std::set<std::string> known;
  visit_fields(c, [&](const std::string& sec, const std::string& key, auto& x) {
    const std::string full = sec.empty() ? key : sec + "." + key;
    known.insert(full);
    if (!sec.empty()) known.insert(sec);
    const nlohmann::json* node = &j;
    if (!sec.empty()) {
      if (!j.contains(sec)) return;
      node = &j.at(sec);
      if (!node->is_object()) bad(sec + ": expected an object");
    }
    if (node->contains(key)) load_value(node->at(key), full, x);
  });
  for (const auto& [k, val] : j.items()) {
    if (!known.count(k)) bad("unknown config key: " + k);
    if (val.is_object()) {
      for (const auto& item : val.items()) {
        if (!known.count(k + "." + item.key())) bad("unknown config key: " + k + "." + item.key());
      }
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = read_json(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingFile) throw;
    bad(e.what());
  }
  return from_json(j);
}

}  // namespace reorient
