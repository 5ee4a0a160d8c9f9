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

// Trajectory decoders and their losses: regression (variety loss), goal-based
// (candidate scoring, offsets, NMS, completion), heatmap-based (dense 1 m
// grid), and the oracle decoder that inverts the feature oracle to recover
// agent state and intent, then rolls out the matching kinematics.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "trackcast/attention.hpp"
#include "trackcast/common.hpp"
#include "trackcast/geometry.hpp"
#include "trackcast/scenario.hpp"

namespace trackcast {

// K candidate futures with per-mode scores in [0, 1].
struct TrajectoryModeSet {
  std::vector<Trajectory> modes;
  std::vector<double> scores;

  int mode_count() const { return static_cast<int>(modes.size()); }

  int top_mode() const {
    int best = 0;
    for (int i = 1; i < mode_count(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    return best;
  }
};

struct DecoderConfig {
  int k = 6;
  int t_future = 12;
  double frame_period = kFramePeriod;
  double smooth_l1_delta = 1.0;
  double tau_goal = 2.0;       // positive-label radius around the endpoint
  double nms_radius = 2.0;
  int n_goal = 128;            // sampled candidates for the goal decoder
  double r_min = 5.0;          // minimum goal-sampling disc radius
  double heatmap_side = 60.0;  // square region side, a multiple of 1 m
  int hidden = 128;
  int goal_embed_dim = 32;
  std::uint64_t seed = 3;

  void validate() const {
    if (k < 1) throw ConfigError("decoder k must be >= 1");
    if (t_future < 1) throw ConfigError("t_future must be >= 1");
    if (frame_period <= 0.0) throw ConfigError("frame_period must be positive");
    if (smooth_l1_delta <= 0.0) throw ConfigError("smooth_l1_delta must be positive");
    if (tau_goal <= 0.0) throw ConfigError("tau_goal must be positive");
    if (nms_radius <= 0.0) throw ConfigError("nms_radius must be positive");
    if (n_goal < k) throw ConfigError("n_goal must be at least k");
    if (r_min < 0.0) throw ConfigError("r_min must be >= 0");
    if (heatmap_side <= 0.0 ||
        std::abs(heatmap_side - std::round(heatmap_side)) > 1e-9) {
      throw ConfigError("heatmap_side must be a positive multiple of 1 m");
    }
    if (hidden <= 0 || goal_embed_dim <= 0) {
      throw ConfigError("decoder hidden sizes must be positive");
    }
  }

  double horizon_seconds() const { return t_future * frame_period; }
};

// ---------------------------------------------------------------------------
// Loss primitives.

inline double smooth_l1_scalar(double x, double delta) {
  const double a = std::abs(x);
  return a < delta ? 0.5 * x * x / delta : a - 0.5 * delta;
}

inline double smooth_l1(const Point2& a, const Point2& b, double delta) {
  return smooth_l1_scalar(a.x - b.x, delta) + smooth_l1_scalar(a.y - b.y, delta);
}

inline double smooth_l1_trajectory(const Trajectory& a, const Trajectory& b,
                                   double delta) {
  if (a.size() != b.size()) {
    throw InvalidInputError("smooth_l1_trajectory: length mismatch");
  }
  double loss = 0.0;
  for (int t = 0; t < a.size(); ++t) {
    loss += smooth_l1(a.points[t], b.points[t], delta);
  }
  return loss;
}

inline constexpr double kProbClamp = 1e-12;

inline double bce(double p, int label) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return label != 0 ? -std::log(q) : -std::log(1.0 - q);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// Regression decoder (variety loss).

struct RegressionDecoderParams {
  Mlp trajectory_head;  // d_h -> k * t_future * 2
  Mlp score_head;       // d_h -> k, softmax into scores

  static RegressionDecoderParams seeded(int d_h, const DecoderConfig& cfg) {
    RegressionDecoderParams p;
    SeededRng rng(derive_seed(cfg.seed, 300));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_h));
    p.trajectory_head =
        Mlp::seeded(d_h, cfg.hidden, cfg.k * cfg.t_future * 2, scale, rng);
    p.score_head = Mlp::seeded(d_h, cfg.hidden, cfg.k, scale, rng);
    return p;
  }
};

inline TrajectoryModeSet regression_decode(const Eigen::VectorXd& query,
                                           const RegressionDecoderParams& params,
                                           const DecoderConfig& cfg) {
  const Eigen::VectorXd flat = params.trajectory_head.apply(query);
  const Eigen::VectorXd scores = softmax(params.score_head.apply(query));
  TrajectoryModeSet set;
  for (int k = 0; k < cfg.k; ++k) {
    Trajectory traj;
    traj.frame = Frame::kAllocentric;
    for (int t = 0; t < cfg.t_future; ++t) {
      const int base = (k * cfg.t_future + t) * 2;
      traj.points.push_back({flat[base], flat[base + 1]});
    }
    set.modes.push_back(std::move(traj));
    set.scores.push_back(scores[k]);
  }
  return set;
}

// Index of the mode with the smallest summed per-step L2 distance to the
// ground truth; lowest index wins ties.
inline int closest_mode(const TrajectoryModeSet& pred, const Trajectory& gt) {
  if (pred.modes.empty()) {
    throw InvalidInputError("closest_mode: no modes");
  }
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int k = 0; k < pred.mode_count(); ++k) {
    if (pred.modes[k].size() != gt.size()) {
      throw InvalidInputError("closest_mode: length mismatch");
    }
    double d = 0.0;
    for (int t = 0; t < gt.size(); ++t) {
      d += distance(pred.modes[k].points[t], gt.points[t]);
    }
    if (d < best_distance) {
      best_distance = d;
      best = k;
    }
  }
  return best;
}

// Smooth-L1 regression loss against the closest mode only.
inline double variety_loss(const TrajectoryModeSet& pred, const Trajectory& gt,
                           double delta) {
  const int k_hat = closest_mode(pred, gt);
  return smooth_l1_trajectory(pred.modes[k_hat], gt, delta);
}

// ---------------------------------------------------------------------------
// Non-maximum suppression over goal candidates.

struct GoalCandidate {
  Point2 position;
  double score = 0.0;
  Point2 offset;
};

// Greedy selection by descending score (lowest index wins ties); candidates
// within `radius` of a selected one are suppressed. Returns indices in
// selection order; fewer than k when exhausted.
inline std::vector<int> nms_select_indices(
    const std::vector<GoalCandidate>& candidates, int k, double radius) {
  if (radius <= 0.0) throw InvalidInputError("nms_select: radius must be > 0");
  std::vector<int> order(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidates[a].score > candidates[b].score;
  });
  std::vector<int> selected;
  std::vector<bool> suppressed(candidates.size(), false);
  for (int idx : order) {
    if (static_cast<int>(selected.size()) >= k) break;
    if (suppressed[idx]) continue;
    selected.push_back(idx);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (distance(candidates[j].position, candidates[idx].position) <= radius) {
        suppressed[j] = true;
      }
    }
  }
  return selected;
}

inline std::vector<GoalCandidate> nms_select(
    const std::vector<GoalCandidate>& candidates, int k, double radius) {
  std::vector<GoalCandidate> out;
  for (int idx : nms_select_indices(candidates, k, radius)) {
    out.push_back(candidates[idx]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Goal-based decoder.

struct GoalDecoderParams {
  Mlp goal_embed;   // 2 -> goal_embed_dim
  Mlp probability;  // d_h + goal_embed_dim -> 1, sigmoid
  Mlp offset;       // d_h + goal_embed_dim -> 2
  Mlp completion;   // d_h + goal_embed_dim -> t_future * 2

  static GoalDecoderParams seeded(int d_h, const DecoderConfig& cfg) {
    GoalDecoderParams p;
    SeededRng rng(derive_seed(cfg.seed, 301));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_h));
    p.goal_embed = Mlp::seeded(2, cfg.hidden, cfg.goal_embed_dim, scale, rng);
    p.probability =
        Mlp::seeded(d_h + cfg.goal_embed_dim, cfg.hidden, 1, scale, rng);
    p.offset = Mlp::seeded(d_h + cfg.goal_embed_dim, cfg.hidden, 2, scale, rng);
    p.completion = Mlp::seeded(d_h + cfg.goal_embed_dim, cfg.hidden,
                               cfg.t_future * 2, scale, rng);
    return p;
  }
};

struct GoalDecodeResult {
  TrajectoryModeSet modes;                // one per selected goal
  std::vector<GoalCandidate> candidates;  // anchors with scores and offsets
  std::vector<Point2> refined;            // anchor + offset
  std::vector<int> selected;              // candidate indices, selection order
};

namespace detail {

inline Eigen::VectorXd concat_query_goal(const Eigen::VectorXd& query,
                                         const Eigen::VectorXd& goal_embedding) {
  Eigen::VectorXd z(query.size() + goal_embedding.size());
  z << query, goal_embedding;
  return z;
}

inline Trajectory complete_goal(const Eigen::VectorXd& query, const Point2& goal,
                                const Mlp& goal_embed, const Mlp& completion,
                                const DecoderConfig& cfg) {
  Eigen::VectorXd coords(2);
  coords << goal.x, goal.y;
  const Eigen::VectorXd z =
      concat_query_goal(query, goal_embed.apply(coords));
  const Eigen::VectorXd flat = completion.apply(z);
  Trajectory traj;
  traj.frame = Frame::kAllocentric;
  for (int t = 0; t < cfg.t_future; ++t) {
    traj.points.push_back({flat[2 * t], flat[2 * t + 1]});
  }
  return traj;
}

}  // namespace detail

// Samples candidate goals uniformly in a disc of radius
// max(r_min, speed * horizon), scores and offsets them, selects K goals by
// NMS and completes a trajectory per goal.
inline GoalDecodeResult goal_decode(const Eigen::VectorXd& query, double speed,
                                    SeededRng& rng,
                                    const GoalDecoderParams& params,
                                    const DecoderConfig& cfg) {
  cfg.validate();
  if (speed == 0.0 && cfg.r_min == 0.0) {
    throw ConfigError("goal_decode: zero speed with r_min = 0 samples nothing");
  }
  const double radius = std::max(cfg.r_min, speed * cfg.horizon_seconds());

  GoalDecodeResult result;
  for (int i = 0; i < cfg.n_goal; ++i) {
    const double r = radius * std::sqrt(rng.uniform01());
    const double theta = 2.0 * kPi * rng.uniform01();
    GoalCandidate candidate;
    candidate.position = {r * std::cos(theta), r * std::sin(theta)};
    Eigen::VectorXd coords(2);
    coords << candidate.position.x, candidate.position.y;
    const Eigen::VectorXd z =
        detail::concat_query_goal(query, params.goal_embed.apply(coords));
    candidate.score = sigmoid(params.probability.apply(z)[0]);
    const Eigen::VectorXd off = params.offset.apply(z);
    candidate.offset = {off[0], off[1]};
    result.candidates.push_back(candidate);
    result.refined.push_back(candidate.position + candidate.offset);
  }

  std::vector<GoalCandidate> refined_candidates;
  for (int i = 0; i < cfg.n_goal; ++i) {
    refined_candidates.push_back(
        {result.refined[i], result.candidates[i].score, {0.0, 0.0}});
  }
  result.selected = nms_select_indices(refined_candidates, cfg.k, cfg.nms_radius);

  for (int idx : result.selected) {
    result.modes.modes.push_back(detail::complete_goal(
        query, result.refined[idx], params.goal_embed, params.completion, cfg));
    result.modes.scores.push_back(result.candidates[idx].score);
  }
  return result;
}

// L = L_cls + L_reg + L_completion. Candidates are labeled positive when
// their anchor lies within tau_goal of the ground-truth endpoint; offsets are
// supervised toward the exact endpoint for positive candidates; the
// completion term supervises the mode whose selected goal is nearest the
// endpoint.
inline double goal_loss(const GoalDecodeResult& decoded, const Trajectory& gt,
                        const DecoderConfig& cfg) {
  if (gt.size() != cfg.t_future) {
    throw InvalidInputError("goal_loss: ground truth length mismatch");
  }
  const Point2 endpoint = gt.points.back();

  double cls = 0.0;
  double reg = 0.0;
  for (const GoalCandidate& candidate : decoded.candidates) {
    const bool positive = distance(candidate.position, endpoint) <= cfg.tau_goal;
    cls += bce(candidate.score, positive ? 1 : 0);
    if (positive) {
      const Point2 target = endpoint - candidate.position;
      reg += smooth_l1(candidate.offset, target, cfg.smooth_l1_delta);
    }
  }

  double completion = 0.0;
  if (!decoded.selected.empty()) {
    int best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < decoded.selected.size(); ++i) {
      const double d = distance(decoded.refined[decoded.selected[i]], endpoint);
      if (d < best_distance) {
        best_distance = d;
        best = static_cast<int>(i);
      }
    }
    completion =
        smooth_l1_trajectory(decoded.modes.modes[best], gt, cfg.smooth_l1_delta);
  }
  return cls + reg + completion;
}

// ---------------------------------------------------------------------------
// Heatmap-based decoder.

struct GoalHeatmap {
  std::vector<Point2> centers;  // row-major over the grid
  std::vector<double> probabilities;
  int cells_per_side = 0;
  double spacing = 1.0;
};

struct HeatmapDecoderParams {
  Mlp goal_embed;
  Mlp probability;
  Mlp completion;

  static HeatmapDecoderParams seeded(int d_h, const DecoderConfig& cfg) {
    HeatmapDecoderParams p;
    SeededRng rng(derive_seed(cfg.seed, 302));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_h));
    p.goal_embed = Mlp::seeded(2, cfg.hidden, cfg.goal_embed_dim, scale, rng);
    p.probability =
        Mlp::seeded(d_h + cfg.goal_embed_dim, cfg.hidden, 1, scale, rng);
    p.completion = Mlp::seeded(d_h + cfg.goal_embed_dim, cfg.hidden,
                               cfg.t_future * 2, scale, rng);
    return p;
  }
};

struct HeatmapDecodeResult {
  TrajectoryModeSet modes;
  GoalHeatmap heatmap;
  std::vector<int> selected;  // cell indices in selection order
  bool fewer_than_k = false;  // region exhausted before reaching k goals
};

// Scores every cell of a 1 m grid centered on the agent, selects K cells by
// NMS and completes a trajectory per selected cell.
inline HeatmapDecodeResult heatmap_decode(const Eigen::VectorXd& query,
                                          const HeatmapDecoderParams& params,
                                          const DecoderConfig& cfg) {
  cfg.validate();
  HeatmapDecodeResult result;
  const int side = static_cast<int>(std::floor(cfg.heatmap_side)) + 1;
  result.heatmap.cells_per_side = side;
  result.heatmap.spacing = 1.0;
  const double half = cfg.heatmap_side / 2.0;

  std::vector<GoalCandidate> cells;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const Point2 center{-half + col * 1.0, -half + row * 1.0};
      Eigen::VectorXd coords(2);
      coords << center.x, center.y;
      const Eigen::VectorXd z =
          detail::concat_query_goal(query, params.goal_embed.apply(coords));
      const double p = sigmoid(params.probability.apply(z)[0]);
      result.heatmap.centers.push_back(center);
      result.heatmap.probabilities.push_back(p);
      cells.push_back({center, p, {0.0, 0.0}});
    }
  }

  result.selected = nms_select_indices(cells, cfg.k, cfg.nms_radius);
  result.fewer_than_k = static_cast<int>(result.selected.size()) < cfg.k;
  for (int idx : result.selected) {
    result.modes.modes.push_back(
        detail::complete_goal(query, result.heatmap.centers[idx],
                              params.goal_embed, params.completion, cfg));
    result.modes.scores.push_back(result.heatmap.probabilities[idx]);
  }
  return result;
}

// L = L_cls + L_completion over the heatmap cells and the selected goal
// nearest the ground-truth endpoint.
inline double heatmap_loss(const HeatmapDecodeResult& decoded,
                           const Trajectory& gt, const DecoderConfig& cfg) {
  if (gt.size() != cfg.t_future) {
    throw InvalidInputError("heatmap_loss: ground truth length mismatch");
  }
  const Point2 endpoint = gt.points.back();
  double cls = 0.0;
  for (std::size_t i = 0; i < decoded.heatmap.centers.size(); ++i) {
    const bool positive =
        distance(decoded.heatmap.centers[i], endpoint) <= cfg.tau_goal;
    cls += bce(decoded.heatmap.probabilities[i], positive ? 1 : 0);
  }

  double completion = 0.0;
  if (!decoded.selected.empty()) {
    int best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < decoded.selected.size(); ++i) {
      const double d =
          distance(decoded.heatmap.centers[decoded.selected[i]], endpoint);
      if (d < best_distance) {
        best_distance = d;
        best = static_cast<int>(i);
      }
    }
    completion =
        smooth_l1_trajectory(decoded.modes.modes[best], gt, cfg.smooth_l1_delta);
  }
  return cls + completion;
}

// ---------------------------------------------------------------------------
// Oracle decoder: the end-to-end information-flow test instrument.

struct OracleDecoderParams {
  FeatureOracleParams feature;
  double turn_rate = kPi / 8.0;
  int turn_start_frame = 8;
  int turn_duration_frames = 8;
  int stop_start_frame = 8;
  double residual_threshold = 1e-6;
};

inline OracleDecoderParams make_oracle_params(const Scene& scene,
                                              const FeatureOracleParams& feature) {
  OracleDecoderParams p;
  p.feature = feature;
  if (scene.metadata.generated) {
    const ScenarioConfig& cfg = scene.metadata.config;
    p.turn_rate = cfg.turn_rate;
    p.turn_start_frame = cfg.turn_start_frame;
    p.turn_duration_frames = cfg.turn_duration_frames();
    p.stop_start_frame = cfg.stop_start_frame;
  }
  return p;
}

struct OracleDecodeResult {
  TrajectoryModeSet modes;  // global frame
  bool fallback = false;    // inversion residual exceeded the threshold
  AgentState decoded;
  double residual = 0.0;
};

namespace detail {

// Rollout of the schedule kinematics from the current frame. kind selects the
// turn/stop behavior; scheduled modes follow the absolute frame schedule,
// immediate modes start turning or stopping right away.
enum class RolloutKind {
  kStraight,
  kScheduledTurnLeft,
  kScheduledTurnRight,
  kScheduledStop,
  kImmediateTurnLeft,
  kImmediateTurnRight,
  kStopNow,
  kHalfSpeed,
};

inline Trajectory oracle_rollout(const AgentState& state, int current_frame,
                                 RolloutKind kind,
                                 const OracleDecoderParams& params,
                                 const DecoderConfig& cfg) {
  const double speed0 = state.speed();
  KinematicState k{state.position, heading_from_velocity(state.vx, state.vy),
                   speed0};
  const int turn_end = params.turn_start_frame + params.turn_duration_frames;
  Trajectory traj;
  traj.frame = Frame::kGlobal;
  for (int step = 0; step < cfg.t_future; ++step) {
    const int frame = current_frame + step;
    double rate = 0.0;
    double speed = speed0;
    switch (kind) {
      case RolloutKind::kStraight:
        break;
      case RolloutKind::kScheduledTurnLeft:
        if (frame >= params.turn_start_frame && frame < turn_end) {
          rate = params.turn_rate;
        }
        break;
      case RolloutKind::kScheduledTurnRight:
        if (frame >= params.turn_start_frame && frame < turn_end) {
          rate = -params.turn_rate;
        }
        break;
      case RolloutKind::kScheduledStop:
        if (frame >= params.stop_start_frame) speed = 0.0;
        break;
      case RolloutKind::kImmediateTurnLeft:
        if (step < params.turn_duration_frames) rate = params.turn_rate;
        break;
      case RolloutKind::kImmediateTurnRight:
        if (step < params.turn_duration_frames) rate = -params.turn_rate;
        break;
      case RolloutKind::kStopNow:
        speed = 0.0;
        break;
      case RolloutKind::kHalfSpeed:
        speed = 0.5 * speed0;
        break;
    }
    k.speed = speed;
    k = kinematic_step(k, cfg.frame_period, rate);
    traj.points.push_back(k.position);
  }
  return traj;
}

}  // namespace detail

// Recovers (position, velocity, intent) from an attended raw feature by
// least squares through the feature oracle's known projections, trying each
// intent hypothesis and keeping the best residual. Rolls out schedule
// kinematics for the decoded intent plus straight/stop/turn alternatives; the
// decoded-intent mode is scored highest. Falls back to straight extrapolation
// when the residual exceeds the threshold (mixed or noisy features).
inline OracleDecodeResult oracle_decode(const Eigen::VectorXd& context,
                                        int current_frame,
                                        const OracleDecoderParams& params,
                                        const DecoderConfig& cfg) {
  cfg.validate();
  const FeatureOracle oracle(params.feature);
  const int d_h = params.feature.d_h;
  if (context.size() != d_h) {
    throw InvalidInputError("oracle_decode: context dimension mismatch");
  }

  // Feature model: f = A u + b(intent), u = (x, y, vx, vy).
  Eigen::MatrixXd head_map = Eigen::MatrixXd::Zero(kSemanticCoords, 4);
  head_map(0, 0) = params.feature.position_scale;
  head_map(1, 1) = params.feature.position_scale;
  head_map(2, 2) = params.feature.velocity_scale;
  head_map(3, 3) = params.feature.velocity_scale;
  Eigen::MatrixXd design(d_h, 4);
  design.topRows(kSemanticCoords) = head_map;
  design.bottomRows(d_h - kSemanticCoords) = oracle.projection() * head_map;
  const auto solver = design.colPivHouseholderQr();

  const Intent hypotheses[] = {Intent::kNone, Intent::kTurnLeft,
                               Intent::kTurnRight, Intent::kStopping};
  Intent best_intent = Intent::kNone;
  Eigen::Vector4d best_state = Eigen::Vector4d::Zero();
  double best_residual = std::numeric_limits<double>::infinity();
  for (Intent intent : hypotheses) {
    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(kSemanticCoords);
    switch (intent) {
      case Intent::kTurnLeft: one_hot[4] = 1.0; break;
      case Intent::kTurnRight: one_hot[5] = 1.0; break;
      case Intent::kStopping: one_hot[6] = 1.0; break;
      case Intent::kNone: break;
    }
    Eigen::VectorXd bias(d_h);
    bias.head(kSemanticCoords) = one_hot;
    bias.tail(d_h - kSemanticCoords) = oracle.projection() * one_hot;
    const Eigen::VectorXd target = context - bias;
    const Eigen::Vector4d u = solver.solve(target);
    const double residual = (design * u - target).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best_intent = intent;
      best_state = u;
    }
  }

  OracleDecodeResult result;
  result.residual = best_residual;
  result.decoded.position = {best_state[0], best_state[1]};
  result.decoded.vx = best_state[2];
  result.decoded.vy = best_state[3];
  result.decoded.intent = best_intent;
  result.fallback = best_residual > params.residual_threshold;
  const Intent intent = result.fallback ? Intent::kNone : best_intent;

  using detail::RolloutKind;
  RolloutKind intent_kind = RolloutKind::kStraight;
  switch (intent) {
    case Intent::kTurnLeft: intent_kind = RolloutKind::kScheduledTurnLeft; break;
    case Intent::kTurnRight: intent_kind = RolloutKind::kScheduledTurnRight; break;
    case Intent::kStopping: intent_kind = RolloutKind::kScheduledStop; break;
    case Intent::kNone: intent_kind = RolloutKind::kStraight; break;
  }

  const std::pair<RolloutKind, double> plan[] = {
      {intent_kind, 0.9},
      {RolloutKind::kStraight, 0.5},
      {RolloutKind::kStopNow, 0.3},
      {RolloutKind::kImmediateTurnLeft, 0.2},
      {RolloutKind::kImmediateTurnRight, 0.2},
      {RolloutKind::kHalfSpeed, 0.1},
  };
  for (int k = 0; k < cfg.k; ++k) {
    const auto& [kind, score] = plan[std::min<std::size_t>(k, std::size(plan) - 1)];
    result.modes.modes.push_back(detail::oracle_rollout(
        result.decoded, current_frame, kind, params, cfg));
    // Padding beyond the plan repeats the last kind with decaying scores.
    result.modes.scores.push_back(
        k < static_cast<int>(std::size(plan)) ? score : score / (k + 1));
  }
  return result;
}

}  // namespace trackcast
