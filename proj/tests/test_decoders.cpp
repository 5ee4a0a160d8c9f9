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

#include "trackcast/decoders.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

using namespace trackcast;

namespace {

DecoderConfig small_config() {
  DecoderConfig cfg;
  cfg.k = 6;
  cfg.t_future = 12;
  cfg.n_goal = 8;
  cfg.hidden = 32;
  cfg.goal_embed_dim = 8;
  cfg.heatmap_side = 4.0;  // 5x5 grid in unit tests
  cfg.seed = 17;
  return cfg;
}

Trajectory straight_line(double step, int n) {
  Trajectory t;
  for (int i = 1; i <= n; ++i) t.points.push_back({step * i, 0.0});
  return t;
}

}  // namespace

TEST_CASE("loss primitives") {
  SECTION("smooth_l1 of identical points is zero") {
    CHECK(smooth_l1({3.0, -2.0}, {3.0, -2.0}, 1.0) == 0.0);
  }

  SECTION("bce at half probability is log 2") {
    CHECK(bce(0.5, 1) == Catch::Approx(std::log(2.0)));
    CHECK(bce(0.5, 0) == Catch::Approx(std::log(2.0)));
  }

  SECTION("bce clamps extreme probabilities") {
    CHECK(std::isfinite(bce(0.0, 1)));
    CHECK(std::isfinite(bce(1.0, 0)));
  }

  SECTION("smooth_l1 branches agree at |x| = delta") {
    const double delta = 1.0;
    const double quadratic = 0.5 * delta * delta / delta;
    const double linear = delta - 0.5 * delta;
    CHECK(std::abs(quadratic - linear) < 1e-12);
    CHECK(quadratic == Catch::Approx(0.5));
    CHECK(smooth_l1_scalar(delta, delta) == Catch::Approx(0.5).margin(1e-12));
    // Same check at a non-unit delta.
    const double d2 = 0.37;
    CHECK(std::abs(0.5 * d2 * d2 / d2 - (d2 - 0.5 * d2)) < 1e-12);
  }
}

TEST_CASE("variety loss") {
  const DecoderConfig cfg = small_config();
  const Trajectory gt = straight_line(1.0, cfg.t_future);

  SECTION("a perfect mode gives zero loss") {
    TrajectoryModeSet set;
    set.modes.push_back(straight_line(2.0, cfg.t_future));
    set.modes.push_back(gt);
    set.scores = {0.5, 0.5};
    CHECK(variety_loss(set, gt, 1.0) == 0.0);
    CHECK(closest_mode(set, gt) == 1);
  }

  SECTION("k = 1 reduces to the plain trajectory loss") {
    TrajectoryModeSet set;
    set.modes.push_back(straight_line(1.5, cfg.t_future));
    set.scores = {1.0};
    CHECK(variety_loss(set, gt, 1.0) ==
          Catch::Approx(smooth_l1_trajectory(set.modes[0], gt, 1.0)));
  }

  SECTION("seeded modes match a brute-force scan") {
    SeededRng rng(71);
    for (int it = 0; it < 50; ++it) {
      TrajectoryModeSet set;
      for (int k = 0; k < 6; ++k) {
        Trajectory mode;
        for (int t = 0; t < cfg.t_future; ++t) {
          mode.points.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
        }
        set.modes.push_back(mode);
        set.scores.push_back(1.0 / 6.0);
      }
      // Oracle: scan every mode, track the smallest summed distance.
      int want_mode = 0;
      double want_distance = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 6; ++k) {
        double d = 0.0;
        for (int t = 0; t < cfg.t_future; ++t) {
          d += std::hypot(set.modes[k].points[t].x - gt.points[t].x,
                          set.modes[k].points[t].y - gt.points[t].y);
        }
        if (d < want_distance) {
          want_distance = d;
          want_mode = k;
        }
      }
      CHECK(closest_mode(set, gt) == want_mode);
      CHECK(variety_loss(set, gt, 1.0) ==
            smooth_l1_trajectory(set.modes[want_mode], gt, 1.0));

      // Min property in the selection metric: the chosen mode has the
      // smallest summed L2 distance of all modes. (The smooth-L1 loss of the
      // chosen mode can exceed another mode's loss because selection happens
      // in L2, matching the loss definition.)
      const auto l2_distance = [&](int k) {
        double d = 0.0;
        for (int t = 0; t < cfg.t_future; ++t) {
          d += std::hypot(set.modes[k].points[t].x - gt.points[t].x,
                          set.modes[k].points[t].y - gt.points[t].y);
        }
        return d;
      };
      for (int k = 0; k < 6; ++k) {
        CHECK(l2_distance(want_mode) <= l2_distance(k) + 1e-12);
      }
    }
  }

  SECTION("length mismatch is rejected") {
    TrajectoryModeSet set;
    set.modes.push_back(straight_line(1.0, cfg.t_future - 1));
    set.scores = {1.0};
    CHECK_THROWS_AS(variety_loss(set, gt, 1.0), InvalidInputError);
  }
}

TEST_CASE("regression decode") {
  const DecoderConfig cfg = small_config();
  const RegressionDecoderParams params = RegressionDecoderParams::seeded(16, cfg);
  SeededRng rng(72);
  const Eigen::VectorXd query = seeded_vector(16, 1.0, rng);
  const TrajectoryModeSet set = regression_decode(query, params, cfg);
  REQUIRE(set.mode_count() == cfg.k);
  double score_sum = 0.0;
  for (int k = 0; k < cfg.k; ++k) {
    CHECK(set.modes[k].size() == cfg.t_future);
    CHECK(set.scores[k] >= 0.0);
    CHECK(set.scores[k] <= 1.0);
    score_sum += set.scores[k];
  }
  CHECK(score_sum == Catch::Approx(1.0));
  const TrajectoryModeSet again = regression_decode(query, params, cfg);
  CHECK(again.modes[0].points[0].x == set.modes[0].points[0].x);
}

TEST_CASE("nms selection") {
  SECTION("well-separated candidates all return in score order") {
    std::vector<GoalCandidate> candidates = {
        {{0, 0}, 0.5, {}}, {{10, 0}, 0.9, {}}, {{0, 10}, 0.7, {}}};
    const auto selected = nms_select_indices(candidates, 3, 2.0);
    CHECK(selected == std::vector<int>{1, 2, 0});
  }

  SECTION("coincident candidates keep only the higher score") {
    std::vector<GoalCandidate> candidates = {{{1, 1}, 0.4, {}},
                                             {{1, 1}, 0.8, {}}};
    const auto selected = nms_select_indices(candidates, 2, 2.0);
    CHECK(selected == std::vector<int>{1});
  }

  SECTION("score ties resolve to the lowest index") {
    std::vector<GoalCandidate> candidates = {{{0, 0}, 0.5, {}},
                                             {{10, 0}, 0.5, {}}};
    const auto selected = nms_select_indices(candidates, 2, 2.0);
    CHECK(selected == std::vector<int>{0, 1});
  }

  SECTION("seeded candidates match a reference greedy pass") {
    SeededRng rng(73);
    for (int it = 0; it < 20; ++it) {
      std::vector<GoalCandidate> candidates;
      for (int i = 0; i < 20; ++i) {
        candidates.push_back(
            {{rng.uniform(-8, 8), rng.uniform(-8, 8)}, rng.uniform01(), {}});
      }
      const auto got = nms_select_indices(candidates, 6, 2.0);

      // Reference: repeatedly take the best-scoring remaining candidate and
      // delete everything within the radius.
      std::vector<int> alive(20);
      for (int i = 0; i < 20; ++i) alive[i] = i;
      std::vector<int> want;
      while (!alive.empty() && static_cast<int>(want.size()) < 6) {
        int best = alive[0];
        for (int idx : alive) {
          if (candidates[idx].score > candidates[best].score) best = idx;
        }
        want.push_back(best);
        std::vector<int> next;
        for (int idx : alive) {
          const double d = std::hypot(
              candidates[idx].position.x - candidates[best].position.x,
              candidates[idx].position.y - candidates[best].position.y);
          if (d > 2.0) next.push_back(idx);
        }
        alive = next;
      }
      CHECK(got == want);

      // Pairwise separation strictly above the radius.
      for (std::size_t a = 0; a < got.size(); ++a) {
        for (std::size_t b = a + 1; b < got.size(); ++b) {
          CHECK(distance(candidates[got[a]].position,
                         candidates[got[b]].position) > 2.0);
        }
      }
    }
  }

  SECTION("invalid radius is rejected") {
    CHECK_THROWS_AS(nms_select_indices({}, 1, 0.0), InvalidInputError);
  }
}

TEST_CASE("goal decoder") {
  const DecoderConfig cfg = small_config();
  const GoalDecoderParams params = GoalDecoderParams::seeded(16, cfg);
  SeededRng rng(74);
  const Eigen::VectorXd query = seeded_vector(16, 1.0, rng);
  const Trajectory gt = straight_line(1.0, cfg.t_future);

  SECTION("hand-built perfect intermediates give zero loss") {
    GoalDecodeResult perfect;
    GoalCandidate candidate;
    candidate.position = gt.points.back();
    candidate.score = 1.0;
    candidate.offset = {0.0, 0.0};
    perfect.candidates = {candidate};
    perfect.refined = {candidate.position};
    perfect.selected = {0};
    perfect.modes.modes = {gt};
    perfect.modes.scores = {1.0};
    CHECK(goal_loss(perfect, gt, cfg) == Catch::Approx(0.0).margin(1e-9));
  }

  SECTION("all-negative labels leave only the bce and completion terms") {
    GoalDecodeResult decoded;
    decoded.candidates = {{{50, 50}, 0.3, {1, 1}}, {{-40, 10}, 0.6, {2, 0}}};
    decoded.refined = {{51, 51}, {-38, 10}};
    decoded.selected = {1};
    decoded.modes.modes = {gt};
    decoded.modes.scores = {0.6};
    const double want = bce(0.3, 0) + bce(0.6, 0) + 0.0;
    CHECK(goal_loss(decoded, gt, cfg) == Catch::Approx(want).margin(1e-12));
  }

  SECTION("seeded decode matches a term-by-term oracle") {
    SeededRng sample_rng(75);
    const GoalDecodeResult decoded =
        goal_decode(query, 2.0, sample_rng, params, cfg);
    REQUIRE(decoded.candidates.size() == static_cast<std::size_t>(cfg.n_goal));
    REQUIRE(!decoded.selected.empty());
    for (double s : decoded.modes.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    for (const Trajectory& mode : decoded.modes.modes) {
      CHECK(mode.size() == cfg.t_future);
    }

    const double got = goal_loss(decoded, gt, cfg);

    double want = 0.0;
    const Point2 endpoint = gt.points.back();
    for (const GoalCandidate& c : decoded.candidates) {
      const bool positive =
          std::hypot(c.position.x - endpoint.x, c.position.y - endpoint.y) <=
          cfg.tau_goal;
      want += bce(c.score, positive ? 1 : 0);
      if (positive) {
        want += smooth_l1_scalar(c.offset.x - (endpoint.x - c.position.x),
                                 cfg.smooth_l1_delta) +
                smooth_l1_scalar(c.offset.y - (endpoint.y - c.position.y),
                                 cfg.smooth_l1_delta);
      }
    }
    std::size_t nearest = 0;
    double nearest_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < decoded.selected.size(); ++i) {
      const Point2& goal = decoded.refined[decoded.selected[i]];
      const double d = std::hypot(goal.x - endpoint.x, goal.y - endpoint.y);
      if (d < nearest_distance) {
        nearest_distance = d;
        nearest = i;
      }
    }
    for (int t = 0; t < cfg.t_future; ++t) {
      want += smooth_l1_scalar(
                  decoded.modes.modes[nearest].points[t].x - gt.points[t].x,
                  cfg.smooth_l1_delta) +
              smooth_l1_scalar(
                  decoded.modes.modes[nearest].points[t].y - gt.points[t].y,
                  cfg.smooth_l1_delta);
    }
    CHECK(got == Catch::Approx(want).margin(1e-9));
  }

  SECTION("decode is deterministic for a fixed rng seed") {
    SeededRng a(99);
    SeededRng b(99);
    const GoalDecodeResult da = goal_decode(query, 2.0, a, params, cfg);
    const GoalDecodeResult db = goal_decode(query, 2.0, b, params, cfg);
    CHECK(da.selected == db.selected);
    CHECK(da.modes.modes[0].points[0].x == db.modes.modes[0].points[0].x);
  }

  SECTION("zero speed with r_min zero is a config error") {
    DecoderConfig bad = cfg;
    bad.r_min = 0.0;
    SeededRng sample_rng(76);
    CHECK_THROWS_AS(goal_decode(query, 0.0, sample_rng, params, bad),
                    ConfigError);
  }
}

TEST_CASE("heatmap decoder") {
  DecoderConfig cfg = small_config();
  const HeatmapDecoderParams params = HeatmapDecoderParams::seeded(16, cfg);
  SeededRng rng(77);
  const Eigen::VectorXd query = seeded_vector(16, 1.0, rng);
  const Trajectory gt = straight_line(0.2, cfg.t_future);

  SECTION("a 10 m region has exactly 121 cells") {
    DecoderConfig wide = cfg;
    wide.heatmap_side = 10.0;
    const HeatmapDecodeResult decoded = heatmap_decode(query, params, wide);
    CHECK(decoded.heatmap.cells_per_side == 11);
    CHECK(decoded.heatmap.centers.size() == 121);
    CHECK(decoded.heatmap.probabilities.size() == 121);
  }

  SECTION("grid spacing is exactly 1 m") {
    const HeatmapDecodeResult decoded = heatmap_decode(query, params, cfg);
    const int side = decoded.heatmap.cells_per_side;
    REQUIRE(side == 5);
    for (int row = 0; row < side; ++row) {
      for (int col = 0; col + 1 < side; ++col) {
        const Point2& a = decoded.heatmap.centers[row * side + col];
        const Point2& b = decoded.heatmap.centers[row * side + col + 1];
        CHECK(b.x - a.x == 1.0);
        CHECK(b.y == a.y);
      }
    }
  }

  SECTION("hand-built perfect heatmap gives zero loss") {
    HeatmapDecodeResult perfect;
    perfect.heatmap.cells_per_side = 1;
    perfect.heatmap.centers = {gt.points.back()};
    perfect.heatmap.probabilities = {1.0};
    perfect.selected = {0};
    perfect.modes.modes = {gt};
    perfect.modes.scores = {1.0};
    CHECK(heatmap_loss(perfect, gt, cfg) == Catch::Approx(0.0).margin(1e-9));
  }

  SECTION("seeded decode matches a cell-by-cell oracle") {
    const HeatmapDecodeResult decoded = heatmap_decode(query, params, cfg);
    const double got = heatmap_loss(decoded, gt, cfg);

    const Point2 endpoint = gt.points.back();
    double want = 0.0;
    for (std::size_t i = 0; i < decoded.heatmap.centers.size(); ++i) {
      const Point2& c = decoded.heatmap.centers[i];
      const bool positive =
          std::hypot(c.x - endpoint.x, c.y - endpoint.y) <= cfg.tau_goal;
      want += bce(decoded.heatmap.probabilities[i], positive ? 1 : 0);
    }
    std::size_t nearest = 0;
    double nearest_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < decoded.selected.size(); ++i) {
      const Point2& c = decoded.heatmap.centers[decoded.selected[i]];
      const double d = std::hypot(c.x - endpoint.x, c.y - endpoint.y);
      if (d < nearest_distance) {
        nearest_distance = d;
        nearest = i;
      }
    }
    want += smooth_l1_trajectory(decoded.modes.modes[nearest], gt,
                                 cfg.smooth_l1_delta);
    CHECK(got == Catch::Approx(want).margin(1e-9));
  }

  SECTION("a region too small for k separated goals returns fewer modes") {
    DecoderConfig tiny = cfg;
    tiny.heatmap_side = 2.0;  // 3x3 grid, radius 2 suppresses aggressively
    const HeatmapDecodeResult decoded = heatmap_decode(query, params, tiny);
    CHECK(decoded.fewer_than_k);
    CHECK(decoded.modes.mode_count() < cfg.k);
  }

  SECTION("fractional region side is rejected") {
    DecoderConfig bad = cfg;
    bad.heatmap_side = 10.5;
    CHECK_THROWS_AS(heatmap_decode(query, params, bad), ConfigError);
  }
}

TEST_CASE("oracle decoder") {
  DecoderConfig cfg = small_config();
  FeatureOracleParams feature;
  feature.d_h = 32;
  OracleDecoderParams params;
  params.feature = feature;
  const FeatureOracle oracle(feature);
  SeededRng rng(78);

  SECTION("turn-left features produce a left-turning top mode") {
    AgentState state;
    state.position = {20.0, 5.0};
    state.vx = 8.0;
    state.vy = 0.0;
    state.intent = Intent::kTurnLeft;
    const Eigen::VectorXd context = oracle.encode(state, rng);
    const OracleDecodeResult result = oracle_decode(context, 3, params, cfg);

    CHECK_FALSE(result.fallback);
    CHECK(result.decoded.intent == Intent::kTurnLeft);
    CHECK(result.decoded.position.x == Catch::Approx(20.0).margin(1e-9));
    CHECK(result.decoded.vx == Catch::Approx(8.0).margin(1e-9));
    CHECK(result.residual < 1e-9);

    const int top = result.modes.top_mode();
    CHECK(top == 0);
    // The top mode ends left of the straight mode (a left turn from +x
    // heading bends toward +y).
    CHECK(result.modes.modes[0].points.back().y >
          result.modes.modes[1].points.back().y + 1.0);
  }

  SECTION("stationary stop-intent agent predicts zero displacement") {
    AgentState state;
    state.position = {-4.0, 2.0};
    state.intent = Intent::kStopping;
    const Eigen::VectorXd context = oracle.encode(state, rng);
    const OracleDecodeResult result = oracle_decode(context, 10, params, cfg);
    CHECK_FALSE(result.fallback);
    CHECK(result.decoded.intent == Intent::kStopping);
    const Trajectory& top = result.modes.modes[result.modes.top_mode()];
    for (const Point2& p : top.points) {
      CHECK(p.x == Catch::Approx(-4.0).margin(1e-9));
      CHECK(p.y == Catch::Approx(2.0).margin(1e-9));
    }
  }

  SECTION("turn rollout matches independent kinematic integration") {
    AgentState state;
    state.position = {10.0, 0.0};
    state.vx = 8.0;
    state.vy = 0.0;
    state.intent = Intent::kTurnLeft;
    const Eigen::VectorXd context = oracle.encode(state, rng);
    const int current_frame = 3;
    const OracleDecodeResult result =
        oracle_decode(context, current_frame, params, cfg);

    // Independent integration of the schedule: straight until the turn
    // window, then constant turn rate.
    double x = 10.0;
    double y = 0.0;
    double heading = 0.0;
    const int turn_end = params.turn_start_frame + params.turn_duration_frames;
    for (int step = 0; step < cfg.t_future; ++step) {
      const int frame = current_frame + step;
      x += 8.0 * 0.5 * std::cos(heading);
      y += 8.0 * 0.5 * std::sin(heading);
      if (frame >= params.turn_start_frame && frame < turn_end) {
        heading += params.turn_rate * 0.5;
      }
      CHECK(std::abs(result.modes.modes[0].points[step].x - x) < 1e-6);
      CHECK(std::abs(result.modes.modes[0].points[step].y - y) < 1e-6);
    }
  }

  SECTION("mixed features trigger the straight fallback") {
    AgentState a;
    a.position = {0.0, 0.0};
    a.vx = 5.0;
    a.intent = Intent::kTurnLeft;
    AgentState b;
    b.position = {40.0, -10.0};
    b.vy = 3.0;
    b.intent = Intent::kTurnRight;
    const Eigen::VectorXd mixed =
        0.5 * oracle.encode(a, rng) + 0.5 * oracle.encode(b, rng);
    const OracleDecodeResult result = oracle_decode(mixed, 0, params, cfg);
    CHECK(result.fallback);
    CHECK(result.residual > params.residual_threshold);
    // Fallback rolls out without the schedule: mode 0 equals the straight
    // mode.
    for (int t = 0; t < cfg.t_future; ++t) {
      CHECK(result.modes.modes[0].points[t].x ==
            result.modes.modes[1].points[t].x);
    }
  }

  SECTION("k modes with scores in range") {
    AgentState state;
    state.vx = 3.0;
    const Eigen::VectorXd context = oracle.encode(state, rng);
    const OracleDecodeResult result = oracle_decode(context, 0, params, cfg);
    REQUIRE(result.modes.mode_count() == cfg.k);
    for (double s : result.modes.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}
