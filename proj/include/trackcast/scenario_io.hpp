/* Copyright 2026 The Trackcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Scenario file schema v1: JSON with top-level {schema_version, scene},
// decimal floats and snake_case field names. load(save(scene)) is identity on
// the data model.

#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "trackcast/common.hpp"
#include "trackcast/scenario.hpp"

namespace trackcast {

inline constexpr int kSceneSchemaVersion = 1;

namespace detail {

using json = nlohmann::json;

inline std::string intent_name(Intent intent) {
  switch (intent) {
    case Intent::kNone: return "none";
    case Intent::kTurnLeft: return "turn_left";
    case Intent::kTurnRight: return "turn_right";
    case Intent::kStopping: return "stopping";
  }
  return "none";
}

inline Intent intent_from_name(const std::string& name, const std::string& path) {
  if (name == "none") return Intent::kNone;
  if (name == "turn_left") return Intent::kTurnLeft;
  if (name == "turn_right") return Intent::kTurnRight;
  if (name == "stopping") return Intent::kStopping;
  throw ValidationError(path, "unknown intent '" + name + "'");
}

inline std::string agent_type_name(AgentType type) {
  return type == AgentType::kVehicle ? "vehicle" : "pedestrian";
}

inline AgentType agent_type_from_name(const std::string& name,
                                      const std::string& path) {
  if (name == "vehicle") return AgentType::kVehicle;
  if (name == "pedestrian") return AgentType::kPedestrian;
  throw ValidationError(path, "unknown agent type '" + name + "'");
}

template <typename T>
T require(const json& node, const char* key, const std::string& path) {
  if (!node.is_object() || !node.contains(key)) {
    throw ValidationError(path + "." + key, "missing field");
  }
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + "." + key, "wrong type");
  }
}

inline json config_to_json(const ScenarioConfig& c) {
  return json{{"straight_vehicles", c.straight_vehicles},
              {"turn_left_vehicles", c.turn_left_vehicles},
              {"turn_right_vehicles", c.turn_right_vehicles},
              {"stopping_pedestrians", c.stopping_pedestrians},
              {"crossing_pedestrians", c.crossing_pedestrians},
              {"frame_count", c.frame_count},
              {"position_noise", c.position_noise},
              {"vehicle_speed", c.vehicle_speed},
              {"pedestrian_speed", c.pedestrian_speed},
              {"turn_rate", c.turn_rate},
              {"turn_start_frame", c.turn_start_frame},
              {"stop_start_frame", c.stop_start_frame},
              {"occluded_straight_vehicles", c.occluded_straight_vehicles},
              {"occlusion_start", c.occlusion_start},
              {"occlusion_length", c.occlusion_length},
              {"map_lanes", c.map_lanes},
              {"map_segment_length", c.map_segment_length}};
}

inline ScenarioConfig config_from_json(const json& node, const std::string& path) {
  ScenarioConfig c;
  c.straight_vehicles = require<int>(node, "straight_vehicles", path);
  c.turn_left_vehicles = require<int>(node, "turn_left_vehicles", path);
  c.turn_right_vehicles = require<int>(node, "turn_right_vehicles", path);
  c.stopping_pedestrians = require<int>(node, "stopping_pedestrians", path);
  c.crossing_pedestrians = require<int>(node, "crossing_pedestrians", path);
  c.frame_count = require<int>(node, "frame_count", path);
  c.position_noise = require<double>(node, "position_noise", path);
  c.vehicle_speed = require<double>(node, "vehicle_speed", path);
  c.pedestrian_speed = require<double>(node, "pedestrian_speed", path);
  c.turn_rate = require<double>(node, "turn_rate", path);
  c.turn_start_frame = require<int>(node, "turn_start_frame", path);
  c.stop_start_frame = require<int>(node, "stop_start_frame", path);
  c.occluded_straight_vehicles =
      require<int>(node, "occluded_straight_vehicles", path);
  c.occlusion_start = require<int>(node, "occlusion_start", path);
  c.occlusion_length = require<int>(node, "occlusion_length", path);
  c.map_lanes = require<int>(node, "map_lanes", path);
  c.map_segment_length = require<double>(node, "map_segment_length", path);
  return c;
}

}  // namespace detail

inline nlohmann::json scenario_config_to_json(const ScenarioConfig& config) {
  return detail::config_to_json(config);
}

// Fields absent from the document keep their defaults.
inline ScenarioConfig scenario_config_from_json(const nlohmann::json& doc) {
  ScenarioConfig c;
  if (!doc.is_object()) {
    throw ValidationError("scenario_config", "expected a JSON object");
  }
  try {
    const auto load = [&](const char* key, auto& field) {
      if (doc.contains(key)) {
        field = doc.at(key)
                    .template get<std::remove_reference_t<decltype(field)>>();
      }
    };
    load("straight_vehicles", c.straight_vehicles);
    load("turn_left_vehicles", c.turn_left_vehicles);
    load("turn_right_vehicles", c.turn_right_vehicles);
    load("stopping_pedestrians", c.stopping_pedestrians);
    load("crossing_pedestrians", c.crossing_pedestrians);
    load("frame_count", c.frame_count);
    load("position_noise", c.position_noise);
    load("vehicle_speed", c.vehicle_speed);
    load("pedestrian_speed", c.pedestrian_speed);
    load("turn_rate", c.turn_rate);
    load("turn_start_frame", c.turn_start_frame);
    load("stop_start_frame", c.stop_start_frame);
    load("occluded_straight_vehicles", c.occluded_straight_vehicles);
    load("occlusion_start", c.occlusion_start);
    load("occlusion_length", c.occlusion_length);
    load("map_lanes", c.map_lanes);
    load("map_segment_length", c.map_segment_length);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario_config", e.what());
  }
  return c;
}

inline std::string save_scene(const Scene& scene) {
  using detail::json;
  scene.validate();

  json agents = json::array();
  for (const GroundTruthAgent& agent : scene.agents) {
    json states = json::array();
    for (const AgentState& s : agent.states) {
      states.push_back(json{{"x", s.position.x},
                            {"y", s.position.y},
                            {"vx", s.vx},
                            {"vy", s.vy},
                            {"length", s.length},
                            {"width", s.width},
                            {"height", s.height},
                            {"heading", s.heading},
                            {"intent", detail::intent_name(s.intent)}});
    }
    agents.push_back(json{{"track_id", agent.track_id},
                          {"type", detail::agent_type_name(agent.type)},
                          {"present", agent.present},
                          {"states", states}});
  }

  json ego = json::array();
  for (const FrameTransform& pose : scene.ego_poses) {
    ego.push_back(json{
        {"x", pose.origin.x}, {"y", pose.origin.y}, {"heading", pose.heading}});
  }

  json map = json::array();
  for (const MapPolyline& polyline : scene.map) {
    json segments = json::array();
    for (const MapSegment& s : polyline.segments) {
      segments.push_back(json{{"x0", s.start.x},
                              {"y0", s.start.y},
                              {"x1", s.end.x},
                              {"y1", s.end.y},
                              {"attribute", s.attribute},
                              {"ordinal", s.ordinal}});
    }
    map.push_back(json{{"segments", segments}});
  }

  json metadata = {{"generated", scene.metadata.generated},
                   {"seed", scene.metadata.seed},
                   {"source", scene.metadata.source}};
  if (scene.metadata.generated) {
    metadata["config"] = detail::config_to_json(scene.metadata.config);
  }

  const json root = {{"schema_version", kSceneSchemaVersion},
                     {"scene", json{{"id", scene.id},
                                    {"frame_period", scene.frame_period},
                                    {"frame_count", scene.frame_count},
                                    {"ego_poses", ego},
                                    {"agents", agents},
                                    {"map", map},
                                    {"metadata", metadata}}}};
  return root.dump(2);
}

inline Scene load_scene(const std::string& bytes) {
  using detail::json;
  using detail::require;
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ValidationError("", std::string("malformed scenario file: ") + e.what());
  }

  const int version = require<int>(root, "schema_version", "");
  if (version != kSceneSchemaVersion) {
    throw VersionError("scenario schema_version " + std::to_string(version) +
                       " is not supported; expected " +
                       std::to_string(kSceneSchemaVersion));
  }
  if (!root.contains("scene")) {
    throw ValidationError("scene", "missing field");
  }
  const json& node = root.at("scene");

  Scene scene;
  scene.id = require<std::string>(node, "id", "scene");
  scene.frame_period = require<double>(node, "frame_period", "scene");
  scene.frame_count = require<int>(node, "frame_count", "scene");

  for (std::size_t i = 0; i < node.at("ego_poses").size(); ++i) {
    const json& pose = node.at("ego_poses").at(i);
    const std::string path = "scene.ego_poses[" + std::to_string(i) + "]";
    scene.ego_poses.push_back({{require<double>(pose, "x", path),
                                require<double>(pose, "y", path)},
                               require<double>(pose, "heading", path)});
  }

  for (std::size_t i = 0; i < node.at("agents").size(); ++i) {
    const json& a = node.at("agents").at(i);
    const std::string path = "scene.agents[" + std::to_string(i) + "]";
    GroundTruthAgent agent;
    agent.track_id = require<std::int64_t>(a, "track_id", path);
    agent.type =
        detail::agent_type_from_name(require<std::string>(a, "type", path), path);
    agent.present = require<std::vector<bool>>(a, "present", path);
    const json& states = a.contains("states") ? a.at("states") : json::array();
    for (std::size_t f = 0; f < states.size(); ++f) {
      const json& s = states.at(f);
      const std::string spath = path + ".states[" + std::to_string(f) + "]";
      AgentState state;
      state.position = {require<double>(s, "x", spath),
                        require<double>(s, "y", spath)};
      state.vx = require<double>(s, "vx", spath);
      state.vy = require<double>(s, "vy", spath);
      state.length = require<double>(s, "length", spath);
      state.width = require<double>(s, "width", spath);
      state.height = require<double>(s, "height", spath);
      state.heading = require<double>(s, "heading", spath);
      state.intent = detail::intent_from_name(
          require<std::string>(s, "intent", spath), spath + ".intent");
      agent.states.push_back(state);
    }
    scene.agents.push_back(std::move(agent));
  }

  if (node.contains("map")) {
    for (std::size_t i = 0; i < node.at("map").size(); ++i) {
      const json& p = node.at("map").at(i);
      const std::string path = "scene.map[" + std::to_string(i) + "]";
      MapPolyline polyline;
      for (std::size_t j = 0; j < p.at("segments").size(); ++j) {
        const json& s = p.at("segments").at(j);
        const std::string spath = path + ".segments[" + std::to_string(j) + "]";
        MapSegment segment;
        segment.start = {require<double>(s, "x0", spath),
                         require<double>(s, "y0", spath)};
        segment.end = {require<double>(s, "x1", spath),
                       require<double>(s, "y1", spath)};
        segment.attribute = require<int>(s, "attribute", spath);
        segment.ordinal = require<int>(s, "ordinal", spath);
        polyline.segments.push_back(segment);
      }
      scene.map.push_back(std::move(polyline));
    }
  }

  if (node.contains("metadata")) {
    const json& m = node.at("metadata");
    scene.metadata.generated = require<bool>(m, "generated", "scene.metadata");
    scene.metadata.seed = require<std::uint64_t>(m, "seed", "scene.metadata");
    scene.metadata.source = require<std::string>(m, "source", "scene.metadata");
    if (scene.metadata.generated) {
      scene.metadata.config =
          detail::config_from_json(m.at("config"), "scene.metadata.config");
    }
  }

  scene.validate();
  return scene;
}

}  // namespace trackcast
