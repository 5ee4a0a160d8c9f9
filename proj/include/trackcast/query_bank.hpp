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

// Agent-query state, the per-track FIFO memory bank and the query lifecycle
// (initialize, adopt, reinitialize). Temporal attention runs between a query
// and its own historical states only.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "trackcast/assignment.hpp"
#include "trackcast/attention.hpp"
#include "trackcast/common.hpp"
#include "trackcast/geometry.hpp"

namespace trackcast {

// A latent feature vector bound to at most one tracked agent. `track_id` is
// the pipeline-issued identity of the current tracking episode (-1 when
// empty); `gt_track_id` is the supervised ground-truth binding. `context`
// holds the attention-weighted combination of the raw frame features the
// query consumed this step.
struct AgentQuery {
  Eigen::VectorXd feature;
  Eigen::VectorXd context;
  Point3 reference_point;
  std::int64_t track_id = -1;
  std::int64_t gt_track_id = -1;
  int age = 0;

  bool tracked() const { return track_id >= 0; }
};

struct QueryBankConfig {
  int d_h = 256;
  int d_k = 32;
  int n_query = 32;
  int s_bank = 4;
  int head_hidden = 256;        // hidden size of the class and box heads
  double reference_range = 50.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (d_h < 8) throw ConfigError("d_h must be at least 8");
    if (d_k <= 0 || n_query <= 0 || s_bank <= 0 || head_hidden <= 0) {
      throw ConfigError("query bank dimensions must be positive");
    }
  }
};

// Seeded constants shared by one pipeline instance: initial embeddings and
// reference points, attention blocks, and the class/box decode heads.
struct QuerySetParams {
  QueryBankConfig config;
  Eigen::MatrixXd initial_embeddings;  // n_query x d_h
  std::vector<Point3> initial_reference_points;
  AttentionParams cross_attention;     // keys are frame features, d_k narrow
  AttentionParams temporal_attention;  // keys are bank entries, d_k = d_h
  Mlp class_head;                      // d_h -> kNumClasses (softmax after)
  Mlp box_head;                        // d_h -> 6

  static QuerySetParams seeded(const QueryBankConfig& config) {
    config.validate();
    QuerySetParams p;
    p.config = config;
    SeededRng rng(derive_seed(config.seed, 100));
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_h));
    p.initial_embeddings =
        seeded_matrix(config.n_query, config.d_h, scale, rng);
    for (int i = 0; i < config.n_query; ++i) {
      p.initial_reference_points.push_back(
          {rng.uniform(-config.reference_range, config.reference_range),
           rng.uniform(-config.reference_range, config.reference_range), 0.0});
    }
    p.cross_attention =
        AttentionParams::seeded(config.d_h, config.d_k, derive_seed(config.seed, 101));
    p.temporal_attention =
        AttentionParams::seeded(config.d_h, config.d_h, derive_seed(config.seed, 102));
    SeededRng head_rng(derive_seed(config.seed, 103));
    p.class_head =
        Mlp::seeded(config.d_h, config.head_hidden, kNumClasses, scale, head_rng);
    p.box_head = Mlp::seeded(config.d_h, config.head_hidden, 6, scale, head_rng);
    return p;
  }
};

inline AgentQuery make_initial_query(const QuerySetParams& params, int slot) {
  AgentQuery q;
  q.feature = params.initial_embeddings.row(slot).transpose();
  q.context = Eigen::VectorXd::Zero(params.config.d_h);
  q.reference_point = params.initial_reference_points.at(slot);
  return q;
}

inline std::vector<AgentQuery> make_initial_queries(const QuerySetParams& params) {
  std::vector<AgentQuery> queries;
  queries.reserve(params.config.n_query);
  for (int i = 0; i < params.config.n_query; ++i) {
    queries.push_back(make_initial_query(params, i));
  }
  return queries;
}

// Class probabilities and box parameters decoded from a query feature.
inline QueryDetection decode_query(const AgentQuery& query,
                                   const QuerySetParams& params) {
  QueryDetection det;
  const Eigen::VectorXd logits = params.class_head.apply(query.feature);
  det.class_probs = softmax(logits);
  const Eigen::VectorXd box = params.box_head.apply(query.feature);
  det.box = {box[0], box[1], box[2], box[3], box[4], box[5]};
  return det;
}

// Per-track FIFO of historical query states with fixed capacity; eviction is
// strictly oldest-first.
class QueryMemoryBank {
 public:
  explicit QueryMemoryBank(int capacity) : capacity_(capacity) {
    if (capacity <= 0) throw ConfigError("bank capacity must be positive");
  }

  int capacity() const { return capacity_; }

  void push(std::int64_t track_id, Eigen::VectorXd state) {
    if (!state.allFinite()) {
      throw InvalidInputError("bank_push: non-finite state");
    }
    auto& fifo = entries_[track_id];
    fifo.push_back(std::move(state));
    if (static_cast<int>(fifo.size()) > capacity_) fifo.pop_front();
  }

  // Null when the track has no history.
  const std::deque<Eigen::VectorXd>* entries(std::int64_t track_id) const {
    const auto it = entries_.find(track_id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void erase(std::int64_t track_id) { entries_.erase(track_id); }

  int size(std::int64_t track_id) const {
    const auto* fifo = entries(track_id);
    return fifo ? static_cast<int>(fifo->size()) : 0;
  }

 private:
  int capacity_;
  std::map<std::int64_t, std::deque<Eigen::VectorXd>> entries_;
};

// Attention of a query over its own historical states followed by the FFN
// residual update. Identity when the track has no history yet; the caller
// pushes the updated state afterwards.
inline AgentQuery temporal_bank_attention(const AgentQuery& query,
                                          const std::deque<Eigen::VectorXd>& bank_entries,
                                          const AttentionParams& params) {
  if (bank_entries.empty()) return query;
  Eigen::MatrixXd keys(static_cast<int>(bank_entries.size()), params.d_model());
  for (std::size_t i = 0; i < bank_entries.size(); ++i) {
    if (bank_entries[i].size() != params.d_model()) {
      throw InvalidInputError("temporal_bank_attention: dimension mismatch");
    }
    keys.row(static_cast<int>(i)) = bank_entries[i].transpose();
  }
  Eigen::MatrixXd q(1, params.d_model());
  q.row(0) = query.feature.transpose();
  const AttentionResult result = cross_attention_update(q, keys, params);
  AgentQuery updated = query;
  updated.feature = result.updated.row(0).transpose();
  return updated;
}

// Applies a supervision outcome to the query set: reinit-flagged queries are
// reset bit-for-bit to their seeded initial slot state and their bank history
// is dropped; matched queries adopt the ground-truth binding, refresh their
// reference point from the target box and receive a pipeline track id for the
// episode.
inline void lifecycle_step(std::vector<AgentQuery>& queries,
                           const SupervisionAssignment& supervision,
                           const QuerySetParams& params, QueryMemoryBank& bank,
                           std::int64_t& next_track_id) {
  if (supervision.labels.size() != queries.size()) {
    throw InvalidInputError("lifecycle_step: supervision must cover all queries");
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    AgentQuery& query = queries[i];
    const QueryLabel& label = supervision.labels[i];
    if (label.reinit) {
      if (query.track_id >= 0) bank.erase(query.track_id);
      query = make_initial_query(params, static_cast<int>(i));
      continue;
    }
    if (!label.matched) continue;
    if (query.gt_track_id != label.track_id) {
      // Newly adopted agent: a fresh tracking episode begins.
      query.gt_track_id = label.track_id;
      query.track_id = next_track_id++;
      query.age = 0;
    }
    query.reference_point = {label.target.box.x, label.target.box.y,
                             label.target.box.z};
  }
}

}  // namespace trackcast
