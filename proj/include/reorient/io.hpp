#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "reorient/pipeline.hpp"
#include "reorient/scene.hpp"

namespace reorient {

/// Throws MissingFile or ParseError.
nlohmann::json read_json(const std::filesystem::path& path);

/// Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json vec3_to_json(const Vec3& v);
/// Throws ParseError unless `j` is an array of 3 finite numbers.
Vec3 vec3_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose6D& p);
Pose6D pose_from_json(const nlohmann::json& j);

/// {"proposed", "stage1_kept", "refined", "empty_warning", "placements":
/// [{"pose", "score", "s_pen", "s_stab", "stage", "category",
/// "afforded_by_support", "margin"}...]}.
nlohmann::json placements_to_json(const PipelineResult& result);

/// Poses from a placements document or a bare pose array.
std::vector<Pose6D> placements_from_json(const nlohmann::json& j);

}  // namespace reorient
