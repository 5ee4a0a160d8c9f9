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

#include "trackcast/query_bank.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <deque>

#include "trackcast/scenario.hpp"

using namespace trackcast;

namespace {

QueryBankConfig small_config() {
  QueryBankConfig cfg;
  cfg.d_h = 16;
  cfg.d_k = 8;
  cfg.n_query = 4;
  cfg.s_bank = 4;
  cfg.head_hidden = 16;
  cfg.seed = 5;
  return cfg;
}

Eigen::VectorXd scalar_state(double v, int d) {
  return Eigen::VectorXd::Constant(d, v);
}

}  // namespace

TEST_CASE("bank push and FIFO eviction") {
  QueryMemoryBank bank(4);

  SECTION("push to empty bank gives length 1") {
    bank.push(1, scalar_state(1.0, 4));
    CHECK(bank.size(1) == 1);
  }

  SECTION("capacity 4 with pushes 1..6 keeps {3,4,5,6} in order") {
    for (int i = 1; i <= 6; ++i) bank.push(1, scalar_state(i, 4));
    const auto* fifo = bank.entries(1);
    REQUIRE(fifo != nullptr);
    REQUIRE(fifo->size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK((*fifo)[i][0] == Catch::Approx(3.0 + i));
    }
  }

  SECTION("interleaved pushes keep per-track FIFOs independent") {
    // Reference oracle: two plain scalar queues with the same capacity rule.
    std::deque<double> want_a;
    std::deque<double> want_b;
    SeededRng rng(88);
    for (int i = 0; i < 25; ++i) {
      const double value = rng.uniform(-5, 5);
      if (rng.uniform01() < 0.5) {
        bank.push(7, scalar_state(value, 4));
        want_a.push_back(value);
        if (want_a.size() > 4) want_a.pop_front();
      } else {
        bank.push(9, scalar_state(value, 4));
        want_b.push_back(value);
        if (want_b.size() > 4) want_b.pop_front();
      }
      const auto check = [&](std::int64_t id, const std::deque<double>& want) {
        if (want.empty()) {
          CHECK(bank.entries(id) == nullptr);
          return;
        }
        const auto* fifo = bank.entries(id);
        REQUIRE(fifo != nullptr);
        REQUIRE(fifo->size() == want.size());
        for (std::size_t k = 0; k < want.size(); ++k) {
          CHECK((*fifo)[k][0] == Catch::Approx(want[k]));
        }
      };
      check(7, want_a);
      check(9, want_b);
      CHECK(bank.size(7) <= 4);
      CHECK(bank.size(9) <= 4);
    }
  }

  SECTION("non-finite states are rejected") {
    CHECK_THROWS_AS(bank.push(1, scalar_state(std::nan(""), 4)),
                    InvalidInputError);
  }
}

TEST_CASE("temporal bank attention") {
  const QuerySetParams params = QuerySetParams::seeded(small_config());
  const int d = params.config.d_h;
  SeededRng rng(21);

  AgentQuery query;
  query.feature = seeded_vector(d, 1.0, rng);
  query.context = Eigen::VectorXd::Zero(d);

  SECTION("empty bank is the identity") {
    const AgentQuery out =
        temporal_bank_attention(query, {}, params.temporal_attention);
    CHECK(out.feature == query.feature);
  }

  SECTION("single entry receives weight one") {
    const Eigen::VectorXd entry = seeded_vector(d, 1.0, rng);
    const AgentQuery out =
        temporal_bank_attention(query, {entry}, params.temporal_attention);
    const Eigen::VectorXd attended =
        params.temporal_attention.w_value.transpose() * entry;
    const Eigen::VectorXd want =
        ffn_update(query.feature + attended, params.temporal_attention);
    CHECK((out.feature - want).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("duplicated entries match the single-entry output") {
    const Eigen::VectorXd entry = seeded_vector(d, 1.0, rng);
    const AgentQuery one =
        temporal_bank_attention(query, {entry}, params.temporal_attention);
    const AgentQuery two = temporal_bank_attention(query, {entry, entry},
                                                   params.temporal_attention);
    CHECK((one.feature - two.feature).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("three seeded states match an explicit arithmetic oracle") {
    std::deque<Eigen::VectorXd> entries = {seeded_vector(d, 1.0, rng),
                                           seeded_vector(d, 1.0, rng),
                                           seeded_vector(d, 1.0, rng)};
    const AgentQuery out =
        temporal_bank_attention(query, entries, params.temporal_attention);

    const AttentionParams& p = params.temporal_attention;
    Eigen::VectorXd logits(3);
    const Eigen::VectorXd qp = p.w_query.transpose() * query.feature;
    for (int j = 0; j < 3; ++j) {
      const Eigen::VectorXd kp = p.w_key.transpose() * entries[j];
      logits[j] = qp.dot(kp) / std::sqrt(static_cast<double>(p.d_key()));
    }
    Eigen::VectorXd weights(3);
    double norm = 0.0;
    const double max_logit = logits.maxCoeff();
    for (int j = 0; j < 3; ++j) {
      weights[j] = std::exp(logits[j] - max_logit);
      norm += weights[j];
    }
    weights /= norm;
    Eigen::VectorXd attended = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < 3; ++j) {
      attended += weights[j] * (p.w_value.transpose() * entries[j]);
    }
    Eigen::VectorXd z = query.feature + attended;
    Eigen::VectorXd hidden = (p.ffn.w1.transpose() * z + p.ffn.b1).cwiseMax(0.0);
    Eigen::VectorXd pre_norm = z + p.ffn.w2.transpose() * hidden + p.ffn.b2;
    const double mean = pre_norm.mean();
    const double var = (pre_norm.array() - mean).square().mean();
    const Eigen::VectorXd normed =
        ((pre_norm.array() - mean) / std::sqrt(var + 1e-12)).matrix();
    const Eigen::VectorXd want =
        (p.ln_gain.array() * normed.array() + p.ln_bias.array()).matrix();

    CHECK((out.feature - want).cwiseAbs().maxCoeff() < 1e-9);
  }

  SECTION("dimension mismatch is rejected") {
    std::deque<Eigen::VectorXd> entries = {Eigen::VectorXd::Zero(d + 1)};
    CHECK_THROWS_AS(
        temporal_bank_attention(query, entries, params.temporal_attention),
        InvalidInputError);
  }
}

TEST_CASE("decode_query produces a distribution and a box") {
  const QuerySetParams params = QuerySetParams::seeded(small_config());
  const auto queries = make_initial_queries(params);
  const QueryDetection det = decode_query(queries[0], params);
  CHECK(std::abs(det.class_probs.sum() - 1.0) < 1e-9);
  CHECK(det.class_probs.minCoeff() >= 0.0);
}

TEST_CASE("lifecycle step") {
  const QuerySetParams params = QuerySetParams::seeded(small_config());
  QueryMemoryBank bank(params.config.s_bank);
  std::int64_t next_id = 0;

  SECTION("no supervision changes leaves queries unchanged") {
    auto queries = make_initial_queries(params);
    const auto before = queries;
    lifecycle_step(queries, SupervisionAssignment::initial(4), params, bank,
                   next_id);
    for (int i = 0; i < 4; ++i) {
      CHECK(queries[i].feature == before[i].feature);
      CHECK(queries[i].track_id == -1);
    }
  }

  SECTION("reinit restores the seeded slot state bit-for-bit") {
    auto queries = make_initial_queries(params);
    queries[2].feature.setConstant(9.0);
    queries[2].track_id = 5;
    queries[2].gt_track_id = 77;
    queries[2].age = 3;
    bank.push(5, queries[2].feature);

    SupervisionAssignment sup = SupervisionAssignment::initial(4);
    sup.labels[2].reinit = true;
    lifecycle_step(queries, sup, params, bank, next_id);

    const AgentQuery fresh = make_initial_query(params, 2);
    CHECK(queries[2].feature == fresh.feature);
    CHECK(queries[2].reference_point.x == fresh.reference_point.x);
    CHECK(queries[2].track_id == -1);
    CHECK(queries[2].age == 0);
    CHECK(bank.entries(5) == nullptr);
  }

  SECTION("adoption assigns a fresh episode id and reference point") {
    auto queries = make_initial_queries(params);
    SupervisionAssignment sup = SupervisionAssignment::initial(4);
    sup.labels[1].matched = true;
    sup.labels[1].track_id = 42;
    sup.labels[1].target = {kClassVehicle, {3.0, -2.0, 0.8, 4.5, 2.0, 1.6}};
    lifecycle_step(queries, sup, params, bank, next_id);
    CHECK(queries[1].track_id == 0);
    CHECK(queries[1].gt_track_id == 42);
    CHECK(queries[1].age == 0);
    CHECK(queries[1].reference_point.x == Catch::Approx(3.0));
    CHECK(next_id == 1);
  }

  SECTION("supervision must cover all queries") {
    auto queries = make_initial_queries(params);
    CHECK_THROWS_AS(lifecycle_step(queries, SupervisionAssignment::initial(3),
                                   params, bank, next_id),
                    InvalidInputError);
  }
}

TEST_CASE("scripted appear-track-disappear-reappear lifecycle") {
  // One straight vehicle with an occlusion gap; drive supervision and
  // lifecycle frame by frame and compare against the scripted expectation.
  ScenarioConfig config;
  config.straight_vehicles = 1;
  config.turn_left_vehicles = 0;
  config.stopping_pedestrians = 0;
  config.crossing_pedestrians = 0;
  config.occluded_straight_vehicles = 1;
  config.occlusion_start = 8;
  config.occlusion_length = 3;
  const Scene scene = generate_synthetic(config, 17);
  const auto gaps = presence_intervals(scene.agents[0]);
  REQUIRE(gaps.size() == 2);

  const QuerySetParams params = QuerySetParams::seeded(small_config());
  QueryMemoryBank bank(params.config.s_bank);
  auto queries = make_initial_queries(params);
  SupervisionAssignment sup = SupervisionAssignment::initial(4);
  std::int64_t next_id = 0;

  std::int64_t first_episode = -1;
  std::int64_t second_episode = -1;

  for (int f = 0; f < config.frame_count; ++f) {
    const FrameObservation obs = observe_frame(scene, f);
    std::vector<GtAgentFrame> gt;
    for (const AgentSnapshot& snap : obs.agents) {
      gt.push_back({snap.track_id, class_index_of(snap.type),
                    {snap.state.position.x, snap.state.position.y,
                     snap.state.height / 2.0, snap.state.length,
                     snap.state.width, snap.state.height}});
    }
    std::vector<QueryDetection> decoded;
    for (const AgentQuery& q : queries) decoded.push_back(decode_query(q, params));
    sup = supervise_queries(sup, decoded, gt);
    lifecycle_step(queries, sup, params, bank, next_id);
    for (AgentQuery& q : queries) {
      if (q.tracked()) bank.push(q.track_id, q.feature);
    }

    const auto tracked_id = [&]() -> std::int64_t {
      for (const AgentQuery& q : queries) {
        if (q.tracked()) return q.track_id;
      }
      return -1;
    };

    if (f <= gaps[0].second) {
      REQUIRE(tracked_id() >= 0);
      if (first_episode < 0) first_episode = tracked_id();
      CHECK(tracked_id() == first_episode);
    } else if (f < gaps[1].first) {
      CHECK(tracked_id() == -1);
      CHECK(bank.entries(first_episode) == nullptr);
    } else {
      REQUIRE(tracked_id() >= 0);
      if (second_episode < 0) second_episode = tracked_id();
      CHECK(tracked_id() == second_episode);
    }
  }

  // The tracking episode id changes across the gap.
  REQUIRE(first_episode >= 0);
  REQUIRE(second_episode >= 0);
  CHECK(first_episode != second_episode);
}
