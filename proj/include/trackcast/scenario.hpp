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

// Scene data model, synthetic scene generation and the feature oracle that
// stands in for an image backbone: it maps agent state (position, velocity,
// intent) to a feature vector with a seeded random projection tail.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trackcast/assignment.hpp"
#include "trackcast/attention.hpp"
#include "trackcast/common.hpp"
#include "trackcast/geometry.hpp"

namespace trackcast {

// Scenes are annotated at 2 Hz.
inline constexpr double kFramePeriod = 0.5;

enum class AgentType { kVehicle = 0, kPedestrian = 1 };

inline int class_index_of(AgentType type) {
  return type == AgentType::kVehicle ? kClassVehicle : kClassPedestrian;
}

enum class Intent { kNone = 0, kTurnLeft = 1, kTurnRight = 2, kStopping = 3 };

// Per-frame ground-truth state of one agent.
struct AgentState {
  Point2 position;
  double vx = 0.0, vy = 0.0;
  double length = 0.0, width = 0.0, height = 0.0;
  double heading = 0.0;
  Intent intent = Intent::kNone;

  double speed() const { return std::hypot(vx, vy); }
};

struct GroundTruthAgent {
  std::int64_t track_id = 0;
  AgentType type = AgentType::kVehicle;
  std::vector<AgentState> states;  // one per frame, defined even when absent
  std::vector<bool> present;       // one per frame

  BoxParams box_at(int frame) const {
    const AgentState& s = states.at(frame);
    return {s.position.x, s.position.y, s.height / 2.0,
            s.length,     s.width,      s.height,      s.heading};
  }
};

// Contiguous [first, last] presence intervals of an agent.
inline std::vector<std::pair<int, int>> presence_intervals(
    const GroundTruthAgent& agent) {
  std::vector<std::pair<int, int>> intervals;
  int start = -1;
  for (int f = 0; f < static_cast<int>(agent.present.size()); ++f) {
    if (agent.present[f] && start < 0) start = f;
    if (!agent.present[f] && start >= 0) {
      intervals.emplace_back(start, f - 1);
      start = -1;
    }
  }
  if (start >= 0) {
    intervals.emplace_back(start, static_cast<int>(agent.present.size()) - 1);
  }
  return intervals;
}

// One lane segment: endpoints, lane attribute code and ordinal within the
// polyline.
struct MapSegment {
  Point2 start;
  Point2 end;
  int attribute = 0;
  int ordinal = 0;
};

struct MapPolyline {
  std::vector<MapSegment> segments;
};

// ---------------------------------------------------------------------------
// Synthetic generation.

// Agent archetype counts and kinematic schedule. Turning and stopping agents
// change behavior at fixed frames so futures are a function of the current
// state, the intent flag and this schedule.
struct ScenarioConfig {
  int straight_vehicles = 2;
  int turn_left_vehicles = 1;
  int turn_right_vehicles = 0;
  int stopping_pedestrians = 1;
  int crossing_pedestrians = 1;
  int frame_count = 20;
  double position_noise = 0.0;  // stddev of jitter on recorded positions
  double vehicle_speed = 8.0;
  double pedestrian_speed = 1.5;
  double turn_rate = kPi / 8.0;  // rad/s during a turn
  int turn_start_frame = 8;
  int stop_start_frame = 8;
  int occluded_straight_vehicles = 0;
  int occlusion_start = 8;
  int occlusion_length = 3;
  int map_lanes = 2;
  double map_segment_length = 10.0;

  void validate() const {
    if (frame_count <= 0) throw ConfigError("frame_count must be positive");
    if (straight_vehicles < 0 || turn_left_vehicles < 0 ||
        turn_right_vehicles < 0 || stopping_pedestrians < 0 ||
        crossing_pedestrians < 0 || occluded_straight_vehicles < 0 ||
        map_lanes < 0) {
      throw ConfigError("agent counts must be nonnegative");
    }
    if (occluded_straight_vehicles > straight_vehicles) {
      throw ConfigError("occluded vehicles exceed straight vehicle count");
    }
    if (vehicle_speed <= 0.0 || pedestrian_speed <= 0.0 || turn_rate <= 0.0) {
      throw ConfigError("speeds and turn rate must be positive");
    }
    if (position_noise < 0.0) throw ConfigError("position_noise must be >= 0");
    if (turn_start_frame < 0 || stop_start_frame < 0 || occlusion_start < 0 ||
        occlusion_length < 0 || map_segment_length <= 0.0) {
      throw ConfigError("schedule frames must be nonnegative");
    }
  }

  // Frames needed for a 90 degree turn at turn_rate.
  int turn_duration_frames() const {
    return static_cast<int>(
        std::lround((kPi / 2.0) / (turn_rate * kFramePeriod)));
  }
};

struct SceneMetadata {
  bool generated = false;
  std::uint64_t seed = 0;
  ScenarioConfig config;  // meaningful when generated
  std::string source;
};

struct Scene {
  std::string id;
  int frame_count = 0;
  double frame_period = kFramePeriod;
  std::vector<FrameTransform> ego_poses;
  std::vector<GroundTruthAgent> agents;
  std::vector<MapPolyline> map;
  SceneMetadata metadata;

  double timestamp(int frame) const { return frame * frame_period; }

  void validate() const {
    if (frame_count <= 0) {
      throw ValidationError("scene.frame_count", "must be positive");
    }
    if (frame_period != kFramePeriod) {
      throw ValidationError("scene.frame_period", "must be exactly 0.5");
    }
    if (static_cast<int>(ego_poses.size()) != frame_count) {
      throw ValidationError("scene.ego_poses", "length must equal frame_count");
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto path = "scene.agents[" + std::to_string(i) + "]";
      const GroundTruthAgent& agent = agents[i];
      if (static_cast<int>(agent.present.size()) != frame_count) {
        throw ValidationError(path + ".present",
                              "mask length must equal frame_count");
      }
      if (static_cast<int>(agent.states.size()) != frame_count) {
        throw ValidationError(path + ".states",
                              "state count must equal frame_count");
      }
      for (int f = 0; f < frame_count; ++f) {
        const AgentState& s = agent.states[f];
        if (!s.position.finite() || !std::isfinite(s.vx) ||
            !std::isfinite(s.vy) || !std::isfinite(s.heading)) {
          throw ValidationError(
              path + ".states[" + std::to_string(f) + "]", "non-finite value");
        }
      }
    }
    for (std::size_t i = 0; i < map.size(); ++i) {
      const auto path = "scene.map[" + std::to_string(i) + "]";
      const auto& segments = map[i].segments;
      for (std::size_t j = 0; j < segments.size(); ++j) {
        if (segments[j].ordinal != static_cast<int>(j)) {
          throw ValidationError(path + ".segments[" + std::to_string(j) + "]",
                                "ordinals must be 0..n-1");
        }
        if (j > 0 && distance(segments[j - 1].end, segments[j].start) > 1e-9) {
          throw ValidationError(path + ".segments[" + std::to_string(j) + "]",
                                "consecutive segments must share endpoints");
        }
      }
    }
  }
};

// Snapshot of one agent visible at a frame.
struct AgentSnapshot {
  std::int64_t track_id = 0;
  AgentType type = AgentType::kVehicle;
  AgentState state;
};

// Everything a pipeline sees at one step. Feature vectors are aligned with
// `agents` and filled by the feature oracle.
struct FrameObservation {
  int index = 0;
  double timestamp = 0.0;
  FrameTransform ego_pose;
  std::vector<AgentSnapshot> agents;
  std::vector<Eigen::VectorXd> features;
};

inline FrameObservation observe_frame(const Scene& scene, int frame) {
  FrameObservation obs;
  obs.index = frame;
  obs.timestamp = scene.timestamp(frame);
  obs.ego_pose = scene.ego_poses.at(frame);
  for (const GroundTruthAgent& agent : scene.agents) {
    if (agent.present.at(frame)) {
      obs.agents.push_back({agent.track_id, agent.type, agent.states[frame]});
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Piecewise constant-velocity / constant-turn-rate kinematics shared by the
// generator and the oracle decoder rollout.

struct KinematicState {
  Point2 position;
  double heading = 0.0;
  double speed = 0.0;
};

// One frame: advance along the current heading, then rotate by the frame's
// turn rate.
inline KinematicState kinematic_step(const KinematicState& s, double dt,
                                     double turn_rate) {
  KinematicState next = s;
  next.position.x += s.speed * dt * std::cos(s.heading);
  next.position.y += s.speed * dt * std::sin(s.heading);
  next.heading = wrap_angle(s.heading + turn_rate * dt);
  return next;
}

namespace detail {

struct ArchetypeSpec {
  AgentType type = AgentType::kVehicle;
  double x0 = 0.0, y0 = 0.0;
  double heading0 = 0.0;
  double speed = 0.0;
  int turn_direction = 0;  // +1 left, -1 right, 0 none
  bool stopping = false;
  double length = 4.5, width = 2.0, height = 1.6;
};

inline GroundTruthAgent roll_out_agent(std::int64_t id, const ArchetypeSpec& spec,
                                       const ScenarioConfig& cfg,
                                       SeededRng& noise_rng) {
  GroundTruthAgent agent;
  agent.track_id = id;
  agent.type = spec.type;
  agent.states.resize(cfg.frame_count);
  agent.present.assign(cfg.frame_count, true);

  const int turn_end = cfg.turn_start_frame + cfg.turn_duration_frames();
  KinematicState k{{spec.x0, spec.y0}, spec.heading0, spec.speed};
  for (int f = 0; f < cfg.frame_count; ++f) {
    const bool turning = spec.turn_direction != 0 &&
                         f >= cfg.turn_start_frame && f < turn_end;
    const bool stopped = spec.stopping && f >= cfg.stop_start_frame;
    k.speed = stopped ? 0.0 : spec.speed;

    AgentState& s = agent.states[f];
    s.position = k.position;
    s.vx = k.speed * std::cos(k.heading);
    s.vy = k.speed * std::sin(k.heading);
    s.heading = k.heading;
    s.length = spec.length;
    s.width = spec.width;
    s.height = spec.height;
    if (spec.turn_direction > 0 && f < turn_end) {
      s.intent = Intent::kTurnLeft;
    } else if (spec.turn_direction < 0 && f < turn_end) {
      s.intent = Intent::kTurnRight;
    } else if (spec.stopping) {
      s.intent = Intent::kStopping;
    } else {
      s.intent = Intent::kNone;
    }
    if (cfg.position_noise > 0.0) {
      s.position.x += noise_rng.gaussian(0.0, cfg.position_noise);
      s.position.y += noise_rng.gaussian(0.0, cfg.position_noise);
    }

    const double rate = turning ? spec.turn_direction * cfg.turn_rate : 0.0;
    k = kinematic_step(k, kFramePeriod, rate);
  }
  return agent;
}

}  // namespace detail

// Deterministic synthetic scene for a (config, seed) pair. Archetype groups
// occupy separated lateral bands so agents never approach each other:
// left turners on top (they curve further up), straight vehicles in the
// middle band, right turners at the bottom (curving further down) and
// pedestrians in a far band on the left.
inline Scene generate_synthetic(const ScenarioConfig& config,
                                std::uint64_t seed) {
  config.validate();
  SeededRng layout_rng(derive_seed(seed, 0));
  SeededRng noise_rng(derive_seed(seed, 1));

  Scene scene;
  scene.id = "synthetic-" + std::to_string(seed);
  scene.frame_count = config.frame_count;
  scene.frame_period = kFramePeriod;
  scene.metadata.generated = true;
  scene.metadata.seed = seed;
  scene.metadata.config = config;

  for (int f = 0; f < config.frame_count; ++f) {
    scene.ego_poses.push_back(
        {{5.0 * kFramePeriod * f - 20.0, -70.0}, 0.0});
  }

  std::int64_t next_id = 1;
  const auto spawn_x = [&]() { return layout_rng.uniform(-15.0, -5.0); };

  for (int i = 0; i < config.straight_vehicles; ++i) {
    detail::ArchetypeSpec spec;
    spec.x0 = spawn_x();
    spec.y0 = -10.0 - 6.0 * i;
    spec.speed = config.vehicle_speed;
    scene.agents.push_back(
        detail::roll_out_agent(next_id++, spec, config, noise_rng));
  }
  for (int i = 0; i < config.turn_left_vehicles; ++i) {
    detail::ArchetypeSpec spec;
    spec.x0 = spawn_x();
    spec.y0 = 25.0 + 8.0 * i;
    spec.speed = config.vehicle_speed;
    spec.turn_direction = +1;
    scene.agents.push_back(
        detail::roll_out_agent(next_id++, spec, config, noise_rng));
  }
  for (int i = 0; i < config.turn_right_vehicles; ++i) {
    detail::ArchetypeSpec spec;
    spec.x0 = spawn_x();
    spec.y0 = -40.0 - 8.0 * i;
    spec.speed = config.vehicle_speed;
    spec.turn_direction = -1;
    scene.agents.push_back(
        detail::roll_out_agent(next_id++, spec, config, noise_rng));
  }
  for (int i = 0; i < config.stopping_pedestrians; ++i) {
    detail::ArchetypeSpec spec;
    spec.type = AgentType::kPedestrian;
    spec.x0 = -40.0 - 5.0 * i;
    spec.y0 = layout_rng.uniform(-2.0, 2.0);
    spec.heading0 = kPi / 2.0;
    spec.speed = config.pedestrian_speed;
    spec.stopping = true;
    spec.length = 0.6;
    spec.width = 0.6;
    spec.height = 1.8;
    scene.agents.push_back(
        detail::roll_out_agent(next_id++, spec, config, noise_rng));
  }
  for (int i = 0; i < config.crossing_pedestrians; ++i) {
    detail::ArchetypeSpec spec;
    spec.type = AgentType::kPedestrian;
    spec.x0 = -70.0 - 5.0 * i;
    spec.y0 = layout_rng.uniform(-5.0, 0.0);
    spec.heading0 = kPi / 2.0;
    spec.speed = config.pedestrian_speed;
    spec.length = 0.6;
    spec.width = 0.6;
    spec.height = 1.8;
    scene.agents.push_back(
        detail::roll_out_agent(next_id++, spec, config, noise_rng));
  }

  // Occlusion gaps on the first straight vehicles.
  for (int i = 0; i < config.occluded_straight_vehicles; ++i) {
    GroundTruthAgent& agent = scene.agents[i];
    const int gap_end =
        std::min(config.occlusion_start + config.occlusion_length,
                 config.frame_count);
    for (int f = config.occlusion_start; f < gap_end; ++f) {
      agent.present[f] = false;
    }
  }

  // Lane centerlines along the straight band.
  for (int lane = 0; lane < config.map_lanes; ++lane) {
    MapPolyline polyline;
    const double y = -10.0 - 6.0 * lane;
    const double x_begin = -60.0;
    const int segment_count = 16;
    for (int s = 0; s < segment_count; ++s) {
      MapSegment segment;
      segment.start = {x_begin + s * config.map_segment_length, y};
      segment.end = {x_begin + (s + 1) * config.map_segment_length, y};
      segment.attribute = lane;
      segment.ordinal = s;
      polyline.segments.push_back(segment);
    }
    scene.map.push_back(polyline);
  }

  scene.validate();
  return scene;
}

// ---------------------------------------------------------------------------
// Feature oracle.

inline constexpr int kSemanticCoords = 7;

struct FeatureOracleParams {
  int d_h = 256;
  double position_scale = 0.01;
  double velocity_scale = 0.1;
  double sigma = 0.0;  // noise stddev on projected coordinates
  std::uint64_t seed = 7;

  void validate() const {
    if (d_h < 8) throw ConfigError("feature oracle requires d_h >= 8");
    if (position_scale == 0.0 || velocity_scale == 0.0) {
      throw ConfigError("feature oracle scales must be nonzero");
    }
    if (sigma < 0.0) throw ConfigError("feature oracle sigma must be >= 0");
  }
};

// Encodes agent state into d_h coordinates: 0-1 scaled position, 2-3 scaled
// velocity, 4-6 intent one-hot (none encodes as zeros), the rest a fixed
// seeded projection of those seven coordinates plus optional Gaussian noise.
class FeatureOracle {
 public:
  explicit FeatureOracle(const FeatureOracleParams& params) : params_(params) {
    params_.validate();
    SeededRng rng(params_.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(params_.d_h));
    projection_ =
        seeded_matrix(params_.d_h - kSemanticCoords, kSemanticCoords, scale, rng);
  }

  Eigen::VectorXd semantic_head(const AgentState& state) const {
    Eigen::VectorXd head = Eigen::VectorXd::Zero(kSemanticCoords);
    head[0] = state.position.x * params_.position_scale;
    head[1] = state.position.y * params_.position_scale;
    head[2] = state.vx * params_.velocity_scale;
    head[3] = state.vy * params_.velocity_scale;
    switch (state.intent) {
      case Intent::kTurnLeft: head[4] = 1.0; break;
      case Intent::kTurnRight: head[5] = 1.0; break;
      case Intent::kStopping: head[6] = 1.0; break;
      case Intent::kNone: break;
    }
    return head;
  }

  Eigen::VectorXd encode(const AgentState& state, SeededRng& rng) const {
    const Eigen::VectorXd head = semantic_head(state);
    Eigen::VectorXd feature(params_.d_h);
    feature.head(kSemanticCoords) = head;
    Eigen::VectorXd tail = projection_ * head;
    if (params_.sigma > 0.0) {
      for (int i = 0; i < tail.size(); ++i) {
        tail[i] += rng.gaussian(0.0, params_.sigma);
      }
    }
    feature.tail(params_.d_h - kSemanticCoords) = tail;
    return feature;
  }

  const Eigen::MatrixXd& projection() const { return projection_; }
  const FeatureOracleParams& params() const { return params_; }

 private:
  FeatureOracleParams params_;
  Eigen::MatrixXd projection_;
};

inline Eigen::VectorXd feature_oracle(const AgentState& state,
                                      const FeatureOracleParams& params,
                                      SeededRng& rng) {
  return FeatureOracle(params).encode(state, rng);
}

}  // namespace trackcast
