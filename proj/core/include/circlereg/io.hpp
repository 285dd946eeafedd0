#pragma once

// JSON forms of the library types. Readers throw SchemaError naming the
// offending member; file helpers throw IoError.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "circlereg/correspondence.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/projective.hpp"
#include "circlereg/synthcam.hpp"

namespace circlereg {

nlohmann::json to_json(const TemplateConfig& c);
TemplateConfig template_config_from_json(const nlohmann::json& j);

/// {"h": [9 numbers, row-major], "convention": "image_from_world"}
nlohmann::json to_json(const Homography& h);
Homography homography_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CorrespondenceSet& corr);
CorrespondenceSet correspondences_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CameraSample& cam);

nlohmann::json to_json(const SweepConfig& c);
/// Members absent from j keep their defaults. Throws InvalidConfig.
SweepConfig sweep_config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace circlereg
