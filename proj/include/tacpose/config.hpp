#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "tacpose/pipeline.hpp"
#include "tacpose/scene.hpp"

namespace tacpose {

using Json = nlohmann::ordered_json;

// Each reader starts from the defaults and overrides only the keys present;
// unknown keys are errors.
SensorModel sensor_from_json(const Json& j);
Json to_json(const SensorModel& s);
GdConfig gd_from_json(const Json& j, GdConfig base = {});
Json to_json(const GdConfig& c);
PipelineConfig pipeline_from_json(const Json& j, PipelineConfig base = {});
Json to_json(const PipelineConfig& c);
SceneConfig scene_config_from_json(const Json& j, SceneConfig base = {});

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

Json pose_to_json(const Pose& p);  // {"position": [x,y,z], "quaternion": [w,x,y,z]}
Pose pose_from_json(const Json& j);

/// "analytic" or a path to an ENCW file.
std::unique_ptr<Encoder> make_encoder(const std::string& spec);

/// Scene files: a JSON document plus one TPAT per sensor next to it.
///   {"object", "ground_truth"?, "sensors": [{"position", "quaternion",
///    "patch", "label"?}], "db"?, "mode"?, "sensor"?, "pipeline"?}
void write_scene(const std::filesystem::path& path, const Scene& scene, const SensorModel& sensor);
Scene read_scene(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace tacpose
