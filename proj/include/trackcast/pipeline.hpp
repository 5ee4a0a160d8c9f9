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

// Streaming evaluation harness: the query-centric pipeline (feature oracle ->
// cross attention -> supervision/lifecycle -> memory bank -> map fusion ->
// decoder), the tracking-by-detection Kalman baseline, per-scene streaming
// evaluation, and side-by-side pipeline comparison.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "trackcast/assignment.hpp"
#include "trackcast/attention.hpp"
#include "trackcast/common.hpp"
#include "trackcast/decoders.hpp"
#include "trackcast/geometry.hpp"
#include "trackcast/map_encoding.hpp"
#include "trackcast/metrics.hpp"
#include "trackcast/query_bank.hpp"
#include "trackcast/scenario.hpp"

namespace trackcast {

enum class PipelineKind { kQuery, kTraditional };
enum class DecoderKind { kRegression, kGoal, kHeatmap, kOracle };
enum class ViewKind { kAllocentric, kEgocentric };

struct PipelineConfig {
  PipelineKind pipeline = PipelineKind::kQuery;
  DecoderKind decoder = DecoderKind::kRegression;
  int k = 6;
  int t_future = 12;  // frames; 6 s at 2 Hz
  ViewKind view = ViewKind::kAllocentric;

  // Metrics.
  double tau_epa = 2.0;
  double alpha = 0.5;
  double mr_threshold = 2.0;

  // Decoders.
  double nms_radius = 2.0;
  double tau_goal = 2.0;
  int n_goal = 128;
  double r_min = 5.0;
  double heatmap_side = 60.0;
  double smooth_l1_delta = 1.0;
  int decoder_hidden = 128;
  int goal_embed_dim = 32;

  // Query bank and attention.
  int s_bank = 4;
  int n_query = 32;
  int d_h = 256;
  int d_k = 32;
  int head_hidden = 256;
  // Must exceed the per-frame displacement of any agent and stay below the
  // smallest inter-agent spacing for isolated feature gathering.
  double gather_radius = 4.5;

  // Feature oracle.
  double feature_sigma = 0.0;
  double feature_position_scale = 0.01;
  double feature_velocity_scale = 0.1;
  std::uint64_t feature_seed = 7;
  double oracle_residual_threshold = 1e-6;

  // Seeds.
  std::uint64_t weight_seed = 1;
  std::uint64_t noise_seed = 2;

  // Traditional baseline.
  double detection_noise = 0.0;
  double detection_dropout = 0.0;
  double kf_process_noise = 0.5;      // accel stddev, m/s^2
  double kf_measurement_noise = 0.2;  // position stddev, m
  double kf_gate = 2.0;               // association gate, m
  int kf_max_misses = 2;

  void validate() const {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (t_future < 1) throw ConfigError("t_future must be >= 1");
    if (tau_epa <= 0.0 || mr_threshold <= 0.0) {
      throw ConfigError("metric thresholds must be positive");
    }
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (gather_radius <= 0.0) throw ConfigError("gather_radius must be positive");
    if (detection_noise < 0.0 || detection_dropout < 0.0 ||
        detection_dropout >= 1.0) {
      throw ConfigError("detection noise/dropout out of range");
    }
    if (kf_process_noise <= 0.0 || kf_measurement_noise <= 0.0 ||
        kf_gate <= 0.0 || kf_max_misses < 1) {
      throw ConfigError("kalman constants out of range");
    }
    decoder_config().validate();
    query_bank_config().validate();
    feature_params().validate();
  }

  DecoderConfig decoder_config() const {
    DecoderConfig cfg;
    cfg.k = k;
    cfg.t_future = t_future;
    cfg.frame_period = kFramePeriod;
    cfg.smooth_l1_delta = smooth_l1_delta;
    cfg.tau_goal = tau_goal;
    cfg.nms_radius = nms_radius;
    cfg.n_goal = n_goal;
    cfg.r_min = r_min;
    cfg.heatmap_side = heatmap_side;
    cfg.hidden = decoder_hidden;
    cfg.goal_embed_dim = goal_embed_dim;
    cfg.seed = weight_seed;
    return cfg;
  }

  QueryBankConfig query_bank_config() const {
    QueryBankConfig cfg;
    cfg.d_h = d_h;
    cfg.d_k = d_k;
    cfg.n_query = n_query;
    cfg.s_bank = s_bank;
    cfg.head_hidden = head_hidden;
    cfg.seed = weight_seed;
    return cfg;
  }

  FeatureOracleParams feature_params() const {
    FeatureOracleParams p;
    p.d_h = d_h;
    p.position_scale = feature_position_scale;
    p.velocity_scale = feature_velocity_scale;
    p.sigma = feature_sigma;
    p.seed = feature_seed;
    return p;
  }

  MetricConfigKey metric_key() const {
    return {k, t_future, tau_epa, alpha, mr_threshold};
  }
};

// L = L_cls + L_coord + L_traj (diagnostic only, summed in this order).
inline double total_loss(double l_cls, double l_coord, double l_traj) {
  return l_cls + l_coord + l_traj;
}

struct StepLosses {
  double l_cls = 0.0;
  double l_coord = 0.0;
};

// Per-agent decode output retained so trajectory losses can be evaluated once
// the ground-truth future becomes available.
struct DecodeArtifact {
  DecoderKind kind = DecoderKind::kRegression;
  std::int64_t gt_track_id = -1;
  FrameTransform view_frame;
  TrajectoryModeSet view_modes;  // regression modes in the view frame
  GoalDecodeResult goal;
  HeatmapDecodeResult heatmap;
};

struct StepResult {
  std::vector<PredictedAgent> agents;
  StepLosses losses;
  std::vector<DecodeArtifact> artifacts;
};

// ---------------------------------------------------------------------------
// Feature attachment and the shared detection stream.

// Frames with oracle features attached; deterministic per (scene, config).
inline std::vector<FrameObservation> attach_features(const Scene& scene,
                                                     const PipelineConfig& config) {
  const FeatureOracle oracle(config.feature_params());
  std::vector<FrameObservation> frames;
  frames.reserve(scene.frame_count);
  for (int f = 0; f < scene.frame_count; ++f) {
    FrameObservation obs = observe_frame(scene, f);
    SeededRng rng(derive_seed(config.noise_seed, static_cast<std::uint64_t>(f)));
    for (const AgentSnapshot& snap : obs.agents) {
      obs.features.push_back(oracle.encode(snap.state, rng));
    }
    frames.push_back(std::move(obs));
  }
  return frames;
}

struct Detection {
  Point2 position;
  AgentType type = AgentType::kVehicle;
};

// Simulated detector output: ground-truth positions plus Gaussian noise and
// seeded dropouts. The stream is a pure function of (noise_seed, frame), so
// paired pipeline comparisons see identical detector behavior.
inline std::vector<Detection> make_detections(const FrameObservation& frame,
                                              const PipelineConfig& config) {
  SeededRng rng(derive_seed(config.noise_seed,
                            0x44455400ULL + static_cast<std::uint64_t>(frame.index)));
  std::vector<Detection> detections;
  for (const AgentSnapshot& snap : frame.agents) {
    const double drop = rng.uniform01();
    const double nx = rng.gaussian(0.0, 1.0);
    const double ny = rng.gaussian(0.0, 1.0);
    if (config.detection_dropout > 0.0 && drop < config.detection_dropout) {
      continue;
    }
    detections.push_back({{snap.state.position.x + config.detection_noise * nx,
                           snap.state.position.y + config.detection_noise * ny},
                          snap.type});
  }
  return detections;
}

// ---------------------------------------------------------------------------
// Query pipeline.

struct QueryPipelineState {
  std::shared_ptr<const QuerySetParams> params;
  std::shared_ptr<const MapEncoderParams> map_params;
  std::shared_ptr<const MapFeatureSet> map_features;
  std::shared_ptr<const RegressionDecoderParams> regression;
  std::shared_ptr<const GoalDecoderParams> goal;
  std::shared_ptr<const HeatmapDecoderParams> heatmap;
  std::shared_ptr<const OracleDecoderParams> oracle;

  std::vector<AgentQuery> queries;
  QueryMemoryBank bank{4};
  SupervisionAssignment supervision;
  std::int64_t next_track_id = 0;
  int next_frame = 0;
  SeededRng decode_rng{0};
  std::map<std::int64_t, double> last_moving_heading;  // by ground-truth id
};

inline QueryPipelineState make_query_state(const Scene& scene,
                                           const PipelineConfig& config) {
  config.validate();
  QueryPipelineState state;
  state.params =
      std::make_shared<QuerySetParams>(QuerySetParams::seeded(config.query_bank_config()));
  state.map_params = std::make_shared<MapEncoderParams>(
      MapEncoderParams::seeded(config.d_h, config.d_k, config.weight_seed));
  state.map_features = std::make_shared<MapFeatureSet>(
      encode_polylines(scene.map, *state.map_params));
  const DecoderConfig decoder_cfg = config.decoder_config();
  state.regression = std::make_shared<RegressionDecoderParams>(
      RegressionDecoderParams::seeded(config.d_h, decoder_cfg));
  state.goal = std::make_shared<GoalDecoderParams>(
      GoalDecoderParams::seeded(config.d_h, decoder_cfg));
  state.heatmap = std::make_shared<HeatmapDecoderParams>(
      HeatmapDecoderParams::seeded(config.d_h, decoder_cfg));
  auto oracle_params = make_oracle_params(scene, config.feature_params());
  oracle_params.residual_threshold = config.oracle_residual_threshold;
  state.oracle = std::make_shared<OracleDecoderParams>(oracle_params);

  state.queries = make_initial_queries(*state.params);
  state.bank = QueryMemoryBank(config.s_bank);
  state.supervision = SupervisionAssignment::initial(config.n_query);
  state.decode_rng = SeededRng(derive_seed(config.noise_seed, 0x6f61ULL));
  return state;
}

namespace detail {

inline const AgentSnapshot* find_snapshot(const FrameObservation& frame,
                                          std::int64_t track_id) {
  for (const AgentSnapshot& snap : frame.agents) {
    if (snap.track_id == track_id) return &snap;
  }
  return nullptr;
}

}  // namespace detail

// One streaming step: only the previous-step queries and the current frame
// are consumed. Emits one mode set per tracked query, in the global frame.
inline StepResult step_query_pipeline(QueryPipelineState& state,
                                      const FrameObservation& frame,
                                      const PipelineConfig& config) {
  if (frame.index != state.next_frame) {
    throw SequencingError("step_query_pipeline: expected frame " +
                          std::to_string(state.next_frame) + ", got " +
                          std::to_string(frame.index));
  }
  if (frame.features.size() != frame.agents.size()) {
    throw InvalidInputError("step_query_pipeline: frame features missing");
  }
  ++state.next_frame;
  const QuerySetParams& params = *state.params;
  const DecoderConfig decoder_cfg = config.decoder_config();

  for (AgentQuery& q : state.queries) ++q.age;

  // Feature update. Tracked queries gather agent features near their
  // reference point; empty queries attend over the whole frame.
  const int n_agents = static_cast<int>(frame.agents.size());
  if (n_agents > 0) {
    Eigen::MatrixXd all_features(n_agents, config.d_h);
    for (int a = 0; a < n_agents; ++a) {
      all_features.row(a) = frame.features[a].transpose();
    }
    for (AgentQuery& q : state.queries) {
      std::vector<int> gathered;
      if (q.tracked()) {
        for (int a = 0; a < n_agents; ++a) {
          if (distance(frame.agents[a].state.position, q.reference_point.xy()) <=
              config.gather_radius) {
            gathered.push_back(a);
          }
        }
        if (gathered.empty()) {
          q.context.setZero();
          continue;
        }
      } else {
        for (int a = 0; a < n_agents; ++a) gathered.push_back(a);
      }
      Eigen::MatrixXd keys(static_cast<int>(gathered.size()), config.d_h);
      for (std::size_t i = 0; i < gathered.size(); ++i) {
        keys.row(static_cast<int>(i)) = all_features.row(gathered[i]);
      }
      Eigen::MatrixXd query_row(1, config.d_h);
      query_row.row(0) = q.feature.transpose();
      const AttentionResult attended =
          cross_attention_update(query_row, keys, params.cross_attention);
      q.feature = attended.updated.row(0).transpose();
      q.context = (attended.weights.row(0) * keys).transpose();
    }
  }

  // Supervision and lifecycle.
  std::vector<QueryDetection> decoded;
  decoded.reserve(state.queries.size());
  for (const AgentQuery& q : state.queries) {
    decoded.push_back(decode_query(q, params));
  }
  std::vector<GtAgentFrame> gt_frame;
  for (const AgentSnapshot& snap : frame.agents) {
    GtAgentFrame gt;
    gt.track_id = snap.track_id;
    gt.class_index = class_index_of(snap.type);
    gt.box = {snap.state.position.x, snap.state.position.y,
              snap.state.height / 2.0, snap.state.length,
              snap.state.width,       snap.state.height};
    gt_frame.push_back(gt);
  }
  state.supervision = supervise_queries(state.supervision, decoded, gt_frame);
  const SupervisionLosses sup_losses =
      supervision_losses(state.supervision, decoded);
  lifecycle_step(state.queries, state.supervision, params, state.bank,
                 state.next_track_id);

  // A query adopted this frame attended globally while it was still empty;
  // its context becomes the bound agent's own feature, which is what a
  // single-key gather at the fresh reference point produces.
  for (AgentQuery& q : state.queries) {
    if (!q.tracked() || q.age != 0) continue;
    for (int a = 0; a < n_agents; ++a) {
      if (frame.agents[a].track_id == q.gt_track_id) {
        q.context = frame.features[a];
        break;
      }
    }
  }

  // Temporal attention against the memory bank, then push the updated state.
  for (AgentQuery& q : state.queries) {
    if (!q.tracked()) continue;
    if (const auto* entries = state.bank.entries(q.track_id)) {
      q = temporal_bank_attention(q, *entries, params.temporal_attention);
    }
    state.bank.push(q.track_id, q.feature);
  }

  // Map fusion feeds the trajectory decoder; the persistent query stream
  // carries the post-bank state forward.
  std::vector<int> tracked_indices;
  for (std::size_t i = 0; i < state.queries.size(); ++i) {
    if (state.queries[i].tracked()) tracked_indices.push_back(static_cast<int>(i));
  }
  std::map<int, Eigen::VectorXd> decode_features;
  if (!tracked_indices.empty()) {
    Eigen::MatrixXd tracked_matrix(static_cast<int>(tracked_indices.size()),
                                   config.d_h);
    for (std::size_t i = 0; i < tracked_indices.size(); ++i) {
      tracked_matrix.row(static_cast<int>(i)) =
          state.queries[tracked_indices[i]].feature.transpose();
    }
    const Eigen::MatrixXd fused = fuse_map(tracked_matrix, *state.map_features,
                                           state.map_params->fusion);
    for (std::size_t i = 0; i < tracked_indices.size(); ++i) {
      decode_features[tracked_indices[i]] = fused.row(static_cast<int>(i)).transpose();
    }
  }

  // Trajectory decoding per tracked query.
  StepResult result;
  result.losses.l_cls = sup_losses.classification;
  result.losses.l_coord = sup_losses.coordinate;
  for (std::size_t qi = 0; qi < state.queries.size(); ++qi) {
    AgentQuery& q = state.queries[qi];
    if (!q.tracked()) continue;
    const Eigen::VectorXd& decode_feature =
        decode_features.at(static_cast<int>(qi));
    const AgentSnapshot* snap = detail::find_snapshot(frame, q.gt_track_id);
    if (snap == nullptr) {
      throw InternalError("step_query_pipeline: tracked agent missing from frame");
    }
    const AgentState& tracked = snap->state;
    if (tracked.speed() >= kStationarySpeed) {
      state.last_moving_heading[q.gt_track_id] =
          std::atan2(tracked.vy, tracked.vx);
    }
    const double fallback_heading =
        state.last_moving_heading.count(q.gt_track_id)
            ? state.last_moving_heading[q.gt_track_id]
            : 0.0;
    const FrameTransform view_frame =
        config.view == ViewKind::kAllocentric
            ? allocentric_frame(tracked.position, tracked.vx, tracked.vy,
                                fallback_heading)
            : frame.ego_pose;

    DecodeArtifact artifact;
    artifact.kind = config.decoder;
    artifact.gt_track_id = q.gt_track_id;
    artifact.view_frame = view_frame;

    PredictedAgent agent;
    agent.track_id = q.track_id;
    agent.type = snap->type;
    agent.current_position = tracked.position;

    switch (config.decoder) {
      case DecoderKind::kOracle: {
        OracleDecodeResult decoded_modes = oracle_decode(
            q.context, frame.index, *state.oracle, decoder_cfg);
        if (decoded_modes.fallback) {
          // Noisy or mixed features make the inversion unusable. Decode a
          // noiseless re-encoding of the tracked state with unknown intent
          // instead, which degrades the prediction to straight extrapolation
          // from the tracked position.
          AgentState plain = tracked;
          plain.intent = Intent::kNone;
          FeatureOracleParams exact = state.oracle->feature;
          exact.sigma = 0.0;
          SeededRng unused(0);
          const Eigen::VectorXd clean = FeatureOracle(exact).encode(plain, unused);
          decoded_modes =
              oracle_decode(clean, frame.index, *state.oracle, decoder_cfg);
          decoded_modes.fallback = true;
        }
        agent.current_position = decoded_modes.decoded.position;
        // Global rollout routed through the view frame and back; the view is
        // a geometry-only detour for this decoder.
        agent.prediction.scores = decoded_modes.modes.scores;
        for (const Trajectory& mode : decoded_modes.modes.modes) {
          const Trajectory in_view = transform_trajectory(
              mode, view_frame, TransformDirection::kForward);
          agent.prediction.modes.push_back(transform_trajectory(
              in_view, view_frame, TransformDirection::kInverse));
        }
        break;
      }
      case DecoderKind::kRegression: {
        artifact.view_modes =
            regression_decode(decode_feature, *state.regression, decoder_cfg);
        agent.prediction.scores = artifact.view_modes.scores;
        for (const Trajectory& mode : artifact.view_modes.modes) {
          agent.prediction.modes.push_back(transform_trajectory(
              mode, view_frame, TransformDirection::kInverse));
        }
        break;
      }
      case DecoderKind::kGoal: {
        artifact.goal = goal_decode(decode_feature, tracked.speed(),
                                    state.decode_rng, *state.goal, decoder_cfg);
        agent.prediction.scores = artifact.goal.modes.scores;
        for (const Trajectory& mode : artifact.goal.modes.modes) {
          agent.prediction.modes.push_back(transform_trajectory(
              mode, view_frame, TransformDirection::kInverse));
        }
        break;
      }
      case DecoderKind::kHeatmap: {
        artifact.heatmap =
            heatmap_decode(decode_feature, *state.heatmap, decoder_cfg);
        agent.prediction.scores = artifact.heatmap.modes.scores;
        for (const Trajectory& mode : artifact.heatmap.modes.modes) {
          agent.prediction.modes.push_back(transform_trajectory(
              mode, view_frame, TransformDirection::kInverse));
        }
        break;
      }
    }
    result.agents.push_back(std::move(agent));
    result.artifacts.push_back(std::move(artifact));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Traditional tracking-by-detection baseline.

struct KalmanTrack {
  Eigen::Vector4d state = Eigen::Vector4d::Zero();  // x, y, vx, vy
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  std::int64_t id = -1;
  AgentType type = AgentType::kVehicle;
  int missed = 0;
  int age = 0;
  bool updated_this_frame = false;
  double last_heading = 0.0;
  std::deque<Point2> history;  // recent posterior positions
};

struct TraditionalPipelineState {
  std::vector<KalmanTrack> tracks;
  std::int64_t next_track_id = 0;
  int next_frame = 0;
};

inline TraditionalPipelineState make_traditional_state(const PipelineConfig& config) {
  config.validate();
  return {};
}

namespace detail {

inline Eigen::Matrix4d kf_transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

inline Eigen::Matrix4d kf_process_noise(double dt, double accel_stddev) {
  const double q = accel_stddev * accel_stddev;
  const double dt2 = dt * dt;
  Eigen::Matrix4d noise = Eigen::Matrix4d::Zero();
  noise(0, 0) = noise(1, 1) = 0.25 * dt2 * dt2 * q;
  noise(0, 2) = noise(2, 0) = 0.5 * dt * dt2 * q;
  noise(1, 3) = noise(3, 1) = 0.5 * dt * dt2 * q;
  noise(2, 2) = noise(3, 3) = dt2 * q;
  return noise;
}

inline void kf_predict(KalmanTrack& track, double dt, double accel_stddev) {
  const Eigen::Matrix4d f = kf_transition(dt);
  track.state = f * track.state;
  track.covariance = f * track.covariance * f.transpose() +
                     kf_process_noise(dt, accel_stddev);
}

inline void kf_update(KalmanTrack& track, const Point2& z, double meas_stddev) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = meas_stddev * meas_stddev * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d innovation =
      Eigen::Vector2d(z.x, z.y) - h * track.state;
  const Eigen::Matrix2d s = h * track.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain =
      track.covariance * h.transpose() * s.inverse();
  track.state += gain * innovation;
  track.covariance =
      (Eigen::Matrix4d::Identity() - gain * h) * track.covariance;
  track.covariance = 0.5 * (track.covariance + track.covariance.transpose());
}

// Constant-velocity rollout with a total heading perturbation spread over the
// horizon. A zero perturbation uses the velocity directly.
inline Trajectory cv_rollout(const Eigen::Vector4d& state, double heading,
                             double total_turn, int steps, double dt) {
  Trajectory traj;
  traj.frame = Frame::kGlobal;
  Point2 p{state[0], state[1]};
  if (total_turn == 0.0) {
    for (int t = 1; t <= steps; ++t) {
      traj.points.push_back({p.x + state[2] * dt * t, p.y + state[3] * dt * t});
    }
    return traj;
  }
  const double speed = std::hypot(state[2], state[3]);
  const double rate = total_turn / (steps * dt);
  KinematicState k{p, heading, speed};
  for (int t = 0; t < steps; ++t) {
    k = kinematic_step(k, dt, rate);
    traj.points.push_back(k.position);
  }
  return traj;
}

// Recency-weighted turn-rate estimate from the track's position history.
inline double observed_turn_rate(const std::deque<Point2>& history, double dt) {
  std::vector<double> headings;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const Point2 step = history[i] - history[i - 1];
    if (step.norm() > 1e-6) headings.push_back(std::atan2(step.y, step.x));
  }
  if (headings.size() < 2) return 0.0;
  double rate = 0.0;
  double weight_sum = 0.0;
  double weight = 1.0;
  for (std::size_t i = headings.size() - 1; i >= 1; --i) {
    const double delta = wrap_angle(headings[i] - headings[i - 1]);
    rate += weight * delta / dt;
    weight_sum += weight;
    weight *= 0.5;
    if (i == 1) break;
  }
  return rate / weight_sum;
}

}  // namespace detail

// Tracking-by-detection step: Kalman predict, gated nearest-neighbor
// association via min-cost matching, update, birth and death. The predictor
// sees only the tracked trajectory history: K modes are constant-velocity
// extrapolations with heading perturbations {0, +-10, +-20 deg} plus a stop
// mode, scored by a recency-weighted fit of the observed turn rate.
inline StepResult step_traditional_pipeline(TraditionalPipelineState& state,
                                            const FrameObservation& frame,
                                            const PipelineConfig& config) {
  if (frame.index != state.next_frame) {
    throw SequencingError("step_traditional_pipeline: expected frame " +
                          std::to_string(state.next_frame) + ", got " +
                          std::to_string(frame.index));
  }
  ++state.next_frame;
  const double dt = kFramePeriod;

  const std::vector<Detection> detections = make_detections(frame, config);

  for (KalmanTrack& track : state.tracks) {
    ++track.age;
    track.updated_this_frame = false;
    detail::kf_predict(track, dt, config.kf_process_noise);
  }

  // Gated association between predicted track positions and detections. The
  // base gate is inflated by the 3-sigma innovation uncertainty so that a
  // newborn track (position known, velocity not yet observed) can still catch
  // its agent one frame later; converged tracks see essentially the base gate.
  CostMatrix cost(static_cast<int>(state.tracks.size()),
                  static_cast<int>(detections.size()));
  const double meas_var =
      config.kf_measurement_noise * config.kf_measurement_noise;
  for (std::size_t t = 0; t < state.tracks.size(); ++t) {
    const Eigen::Matrix2d innovation_cov =
        state.tracks[t].covariance.topLeftCorner<2, 2>() +
        meas_var * Eigen::Matrix2d::Identity();
    const double half_trace = 0.5 * innovation_cov.trace();
    const double discriminant = std::max(
        0.0, half_trace * half_trace - innovation_cov.determinant());
    const double max_eigenvalue = half_trace + std::sqrt(discriminant);
    const double gate = config.kf_gate + 3.0 * std::sqrt(max_eigenvalue);
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double dist = std::hypot(
          state.tracks[t].state[0] - detections[d].position.x,
          state.tracks[t].state[1] - detections[d].position.y);
      cost.at(static_cast<int>(t), static_cast<int>(d)) =
          dist <= gate ? dist : kForbiddenCost;
    }
  }
  const MatchResult match = hungarian(cost);

  std::vector<bool> detection_used(detections.size(), false);
  for (const auto& [t, d] : match.pairs) {
    KalmanTrack& track = state.tracks[t];
    detail::kf_update(track, detections[d].position, config.kf_measurement_noise);
    track.missed = 0;
    track.updated_this_frame = true;
    detection_used[d] = true;
    track.history.push_back({track.state[0], track.state[1]});
    if (track.history.size() > 5) track.history.pop_front();
    if (std::hypot(track.state[2], track.state[3]) >= kStationarySpeed) {
      track.last_heading = std::atan2(track.state[3], track.state[2]);
    }
  }
  for (int t : match.unmatched_rows) {
    state.tracks[t].missed += 1;
  }
  state.tracks.erase(
      std::remove_if(state.tracks.begin(), state.tracks.end(),
                     [&](const KalmanTrack& track) {
                       return track.missed >= config.kf_max_misses;
                     }),
      state.tracks.end());

  // Birth: one new track per unmatched detection.
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (detection_used[d]) continue;
    KalmanTrack track;
    track.id = state.next_track_id++;
    track.type = detections[d].type;
    track.state << detections[d].position.x, detections[d].position.y, 0.0, 0.0;
    track.covariance = Eigen::Matrix4d::Zero();
    track.covariance(0, 0) = track.covariance(1, 1) =
        config.kf_measurement_noise * config.kf_measurement_noise;
    track.covariance(2, 2) = track.covariance(3, 3) = 100.0;
    track.updated_this_frame = true;
    track.history.push_back(detections[d].position);
    state.tracks.push_back(std::move(track));
  }

  // Emit predictions for tracks observed this frame.
  StepResult result;
  const double horizon = config.t_future * dt;
  const double turn_options[] = {0.0, 10.0 * kPi / 180.0, -10.0 * kPi / 180.0,
                                 20.0 * kPi / 180.0, -20.0 * kPi / 180.0};
  for (KalmanTrack& track : state.tracks) {
    if (!track.updated_this_frame) continue;
    const double speed = std::hypot(track.state[2], track.state[3]);
    const double heading =
        speed >= kStationarySpeed ? std::atan2(track.state[3], track.state[2])
                                  : track.last_heading;
    const double observed_rate = detail::observed_turn_rate(track.history, dt);

    PredictedAgent agent;
    agent.track_id = track.id;
    agent.type = track.type;
    agent.current_position = {track.state[0], track.state[1]};

    std::vector<double> raw_scores;
    for (double turn : turn_options) {
      if (agent.prediction.modes.size() + 1 >= static_cast<std::size_t>(config.k)) {
        break;
      }
      agent.prediction.modes.push_back(detail::cv_rollout(
          track.state, heading, turn, config.t_future, dt));
      const double mode_rate = turn / horizon;
      raw_scores.push_back(std::exp(-std::abs(mode_rate - observed_rate) / 0.1));
    }
    // Stop mode: hold the current position.
    Trajectory stop;
    stop.frame = Frame::kGlobal;
    for (int t = 0; t < config.t_future; ++t) {
      stop.points.push_back(agent.current_position);
    }
    agent.prediction.modes.push_back(std::move(stop));
    raw_scores.push_back(std::exp(-speed / 1.0));

    const double max_raw = *std::max_element(raw_scores.begin(), raw_scores.end());
    for (double s : raw_scores) {
      agent.prediction.scores.push_back(max_raw > 0.0 ? s / max_raw : 0.0);
    }
    result.agents.push_back(std::move(agent));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Streaming evaluation.

struct PipelineState {
  PipelineKind kind = PipelineKind::kQuery;
  QueryPipelineState query;
  TraditionalPipelineState traditional;
};

inline PipelineState make_pipeline_state(const Scene& scene,
                                         const PipelineConfig& config) {
  PipelineState state;
  state.kind = config.pipeline;
  if (config.pipeline == PipelineKind::kQuery) {
    state.query = make_query_state(scene, config);
  } else {
    state.traditional = make_traditional_state(config);
  }
  return state;
}

inline StepResult step_pipeline(PipelineState& state, const FrameObservation& frame,
                                const PipelineConfig& config) {
  return state.kind == PipelineKind::kQuery
             ? step_query_pipeline(state.query, frame, config)
             : step_traditional_pipeline(state.traditional, frame, config);
}

// Ground-truth targets at a step: agents present now and throughout the
// future horizon.
inline std::vector<GroundTruthTarget> ground_truth_targets(const Scene& scene,
                                                           int frame,
                                                           int t_future) {
  std::vector<GroundTruthTarget> targets;
  for (const GroundTruthAgent& agent : scene.agents) {
    bool covered = agent.present[frame];
    for (int f = frame + 1; covered && f <= frame + t_future; ++f) {
      covered = agent.present[f];
    }
    if (!covered) continue;
    GroundTruthTarget target;
    target.track_id = agent.track_id;
    target.type = agent.type;
    target.current_position = agent.states[frame].position;
    target.future.frame = Frame::kGlobal;
    for (int f = frame + 1; f <= frame + t_future; ++f) {
      target.future.points.push_back(agent.states[f].position);
    }
    targets.push_back(std::move(target));
  }
  return targets;
}

struct EvalOutcome {
  MetricReport report;
  double mean_total_loss = 0.0;
  std::vector<double> per_step_loss;  // evaluated steps only
};

namespace detail {

inline double trajectory_loss(const DecodeArtifact& artifact,
                              const Trajectory& gt_future_global,
                              const DecoderConfig& cfg) {
  const Trajectory gt_view = transform_trajectory(
      gt_future_global, artifact.view_frame, TransformDirection::kForward);
  switch (artifact.kind) {
    case DecoderKind::kRegression:
      return variety_loss(artifact.view_modes, gt_view, cfg.smooth_l1_delta);
    case DecoderKind::kGoal:
      return goal_loss(artifact.goal, gt_view, cfg);
    case DecoderKind::kHeatmap:
      return heatmap_loss(artifact.heatmap, gt_view, cfg);
    case DecoderKind::kOracle:
      return 0.0;  // test instrument; nothing is supervised
  }
  return 0.0;
}

}  // namespace detail

// Runs the configured pipeline frame by frame and evaluates every step that
// still has t_future future frames. Scenes shorter than t_future + 1 frames
// yield an empty report with the warning flag set.
inline EvalOutcome evaluate_stream(const Scene& scene, const PipelineConfig& config) {
  config.validate();
  scene.validate();
  EvalOutcome outcome;
  outcome.report.key = config.metric_key();
  if (scene.frame_count < config.t_future + 1) {
    outcome.report.warning = true;
    return outcome;
  }

  const std::vector<FrameObservation> frames = attach_features(scene, config);
  PipelineState state = make_pipeline_state(scene, config);
  const DecoderConfig decoder_cfg = config.decoder_config();
  const int evaluated_steps = scene.frame_count - config.t_future;

  double loss_sum = 0.0;
  for (int f = 0; f < scene.frame_count; ++f) {
    const StepResult step = step_pipeline(state, frames[f], config);
    if (f >= evaluated_steps) continue;

    const std::vector<GroundTruthTarget> targets =
        ground_truth_targets(scene, f, config.t_future);
    accumulate_step(outcome.report, step.agents, targets);

    double l_traj = 0.0;
    for (const DecodeArtifact& artifact : step.artifacts) {
      for (const GroundTruthTarget& target : targets) {
        if (target.track_id == artifact.gt_track_id) {
          l_traj += detail::trajectory_loss(artifact, target.future, decoder_cfg);
          break;
        }
      }
    }
    const double step_total =
        total_loss(step.losses.l_cls, step.losses.l_coord, l_traj);
    outcome.per_step_loss.push_back(step_total);
    loss_sum += step_total;
  }
  if (!outcome.per_step_loss.empty()) {
    outcome.mean_total_loss = loss_sum / outcome.per_step_loss.size();
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// Pipeline comparison.

struct CompareEntry {
  std::string label;
  PipelineConfig config;
};

struct CompareRow {
  std::string label;
  bool ok = false;
  std::string error;
  FinalMetrics metrics;
  double mean_total_loss = 0.0;
  std::int64_t steps = 0;
};

// Runs every configuration over the scene set; configuration failures are
// reported per row without aborting the rest. Row order follows input order.
inline std::vector<CompareRow> compare(const std::vector<Scene>& scenes,
                                       const std::vector<CompareEntry>& entries) {
  if (scenes.empty()) throw InvalidInputError("compare: no scenes");
  if (entries.empty()) throw InvalidInputError("compare: no configurations");
  std::vector<CompareRow> rows;
  for (const CompareEntry& entry : entries) {
    CompareRow row;
    row.label = entry.label;
    try {
      entry.config.validate();
      MetricReport merged;
      merged.key = entry.config.metric_key();
      double loss_sum = 0.0;
      int outcome_count = 0;
      for (const Scene& scene : scenes) {
        const EvalOutcome outcome = evaluate_stream(scene, entry.config);
        merged = aggregate(merged, outcome.report);
        loss_sum += outcome.mean_total_loss;
        ++outcome_count;
      }
      row.metrics = finalize(merged);
      row.mean_total_loss = outcome_count > 0 ? loss_sum / outcome_count : 0.0;
      row.steps = merged.steps;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string compare_table_csv(const std::vector<CompareRow>& rows) {
  std::string csv = "label,status,minADE,minFDE,MR,EPA,mean_total_loss,steps\n";
  char buffer[256];
  for (const CompareRow& row : rows) {
    if (!row.ok) {
      csv += row.label + ",error,,,,,,\n";
      continue;
    }
    std::snprintf(buffer, sizeof(buffer), "%s,ok,%.6f,%.6f,%.6f,%.6f,%.6f,%lld\n",
                  row.label.c_str(), row.metrics.overall.min_ade,
                  row.metrics.overall.min_fde, row.metrics.overall.miss_rate,
                  row.metrics.overall.epa, row.mean_total_loss,
                  static_cast<long long>(row.steps));
    csv += buffer;
  }
  return csv;
}

inline std::string compare_table_text(const std::vector<CompareRow>& rows) {
  std::string text;
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), "%-24s %10s %10s %10s %10s %12s\n",
                "config", "minADE", "minFDE", "MR", "EPA", "total_loss");
  text += buffer;
  for (const CompareRow& row : rows) {
    if (!row.ok) {
      std::snprintf(buffer, sizeof(buffer), "%-24s failed: %s\n",
                    row.label.c_str(), row.error.c_str());
      text += buffer;
      continue;
    }
    std::snprintf(buffer, sizeof(buffer),
                  "%-24s %10.4f %10.4f %10.4f %10.4f %12.4f\n", row.label.c_str(),
                  row.metrics.overall.min_ade, row.metrics.overall.min_fde,
                  row.metrics.overall.miss_rate, row.metrics.overall.epa,
                  row.mean_total_loss);
    text += buffer;
  }
  return text;
}

}  // namespace trackcast
