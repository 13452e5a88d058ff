#include "reorient/io.hpp"

#include <cmath>
#include <fstream>

#include "reorient/error.hpp"

namespace reorient {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

nlohmann::json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected 3 numbers");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) throw Error(ErrorCode::ParseError, "expected 3 numbers");
    v[k] = j[k].get<double>();
  }
  if (!v.allFinite()) throw Error(ErrorCode::ParseError, "non-finite vector");
  return v;
}

nlohmann::json pose_to_json(const Pose6D& p) { return p.to_array(); }

Pose6D pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw Error(ErrorCode::ParseError, "pose needs 6 numbers");
  std::array<double, 6> v;
  for (std::size_t k = 0; k < 6; ++k) {
    if (!j[k].is_number()) throw Error(ErrorCode::ParseError, "non-numeric pose");
    v[k] = j[k].get<double>();
  }
  return Pose6D::from_array(v);
}

namespace {

nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json placements_to_json(const PipelineResult& result) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : result.placements) {
    arr.push_back({{"pose", pose_to_json(c.delta)},
                   {"score", c.report.score},
                   {"s_pen", c.report.s_pen},
                   {"s_stab", c.report.s_stab},
                   {"stage", c.stage},
                   {"category", std::string(category_name(c.report.category))},
                   {"afforded_by_support", c.report.afforded_by_support},
                   {"margin", finite_or_null(c.report.margin)}});
  }
  return {{"proposed", result.proposed},
          {"stage1_kept", result.stage1_kept},
          {"refined", result.refined},
          {"empty_warning", result.empty_warning},
          {"placements", arr}};
}

std::vector<Pose6D> placements_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_object() && j.contains("placements") ? j.at("placements") : j;
  if (!arr.is_array()) throw Error(ErrorCode::ParseError, "expected a placement array");
  std::vector<Pose6D> poses;
  for (const auto& rec : arr) {
    poses.push_back(pose_from_json(rec.is_object() && rec.contains("pose") ? rec.at("pose") : rec));
  }
  return poses;
}

}  // namespace reorient
