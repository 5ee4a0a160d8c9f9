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

// minADE / minFDE / miss rate and end-to-end prediction accuracy (EPA):
// per-type matching of predicted agents to ground truth by current-position
// distance under a threshold, hit counting on minFDE, and a false-positive
// penalty. Reports merge associatively so scenes can be evaluated in
// parallel and reduced.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "trackcast/assignment.hpp"
#include "trackcast/common.hpp"
#include "trackcast/decoders.hpp"
#include "trackcast/geometry.hpp"
#include "trackcast/scenario.hpp"

namespace trackcast {

struct PredictedAgent {
  std::int64_t track_id = -1;
  AgentType type = AgentType::kVehicle;
  Point2 current_position;  // s_hat_0
  TrajectoryModeSet prediction;
};

struct GroundTruthTarget {
  std::int64_t track_id = -1;
  AgentType type = AgentType::kVehicle;
  Point2 current_position;  // s_0
  Trajectory future;        // length t_future
};

// Matching cost is the current-step distance when within tau_epa, forbidden
// beyond it. Returns the row (prediction) to column (ground truth) matching;
// every unmatched prediction is a false positive.
inline MatchResult epa_match(const std::vector<PredictedAgent>& preds,
                             const std::vector<GroundTruthTarget>& gts,
                             double tau_epa) {
  CostMatrix cost(static_cast<int>(preds.size()), static_cast<int>(gts.size()));
  for (std::size_t r = 0; r < preds.size(); ++r) {
    for (std::size_t c = 0; c < gts.size(); ++c) {
      const double d = distance(preds[r].current_position, gts[c].current_position);
      cost.at(static_cast<int>(r), static_cast<int>(c)) =
          d <= tau_epa ? d : kForbiddenCost;
    }
  }
  return hungarian(cost);
}

struct MinErrors {
  double min_ade = 0.0;
  double min_fde = 0.0;
  bool hit = false;  // min_fde <= tau_epa
};

// Minimum over modes of the average / final-step displacement; the minima are
// taken independently per metric.
inline MinErrors min_errors(const TrajectoryModeSet& pred, const Trajectory& gt,
                            double tau_epa) {
  if (pred.modes.empty()) {
    throw InvalidInputError("min_errors: no prediction modes");
  }
  MinErrors out;
  out.min_ade = std::numeric_limits<double>::infinity();
  out.min_fde = std::numeric_limits<double>::infinity();
  for (const Trajectory& mode : pred.modes) {
    const DisplacementErrors errors = displacement_errors(mode, gt);
    out.min_ade = std::min(out.min_ade, errors.ade);
    out.min_fde = std::min(out.min_fde, errors.fde);
  }
  out.hit = out.min_fde <= tau_epa;
  return out;
}

// Configuration fingerprint; reports from different configurations do not
// merge.
struct MetricConfigKey {
  int k = 6;
  int t_future = 12;
  double tau_epa = 2.0;
  double alpha = 0.5;
  double mr_threshold = 2.0;

  bool operator==(const MetricConfigKey&) const = default;
};

struct TypeCounters {
  double sum_min_ade = 0.0;
  double sum_min_fde = 0.0;
  std::int64_t matched = 0;
  std::int64_t misses = 0;  // matched with min_fde > mr_threshold
  std::int64_t hits = 0;    // matched with min_fde <= tau_epa
  std::int64_t false_positives = 0;
  std::int64_t ground_truth = 0;
};

struct MetricReport {
  MetricConfigKey key;
  std::int64_t steps = 0;
  bool warning = false;  // e.g. scene too short to evaluate
  std::map<AgentType, TypeCounters> per_type;

  TypeCounters totals() const {
    TypeCounters t;
    for (const auto& [type, c] : per_type) {
      t.sum_min_ade += c.sum_min_ade;
      t.sum_min_fde += c.sum_min_fde;
      t.matched += c.matched;
      t.misses += c.misses;
      t.hits += c.hits;
      t.false_positives += c.false_positives;
      t.ground_truth += c.ground_truth;
    }
    return t;
  }
};

// Evaluates one step: per-type EPA matching, displacement errors for matched
// pairs, false-positive and ground-truth counting.
inline void accumulate_step(MetricReport& report,
                            const std::vector<PredictedAgent>& preds,
                            const std::vector<GroundTruthTarget>& gts) {
  const AgentType types[] = {AgentType::kVehicle, AgentType::kPedestrian};
  for (AgentType type : types) {
    std::vector<PredictedAgent> type_preds;
    std::vector<GroundTruthTarget> type_gts;
    for (const auto& p : preds) {
      if (p.type == type) type_preds.push_back(p);
    }
    for (const auto& g : gts) {
      if (g.type == type) type_gts.push_back(g);
    }
    if (type_preds.empty() && type_gts.empty()) continue;

    TypeCounters& counters = report.per_type[type];
    counters.ground_truth += static_cast<std::int64_t>(type_gts.size());

    const MatchResult match = epa_match(type_preds, type_gts, report.key.tau_epa);
    counters.false_positives +=
        static_cast<std::int64_t>(type_preds.size() - match.pairs.size());
    for (const auto& [pred_index, gt_index] : match.pairs) {
      const MinErrors errors =
          min_errors(type_preds[pred_index].prediction,
                     type_gts[gt_index].future, report.key.tau_epa);
      counters.matched += 1;
      counters.sum_min_ade += errors.min_ade;
      counters.sum_min_fde += errors.min_fde;
      counters.hits += errors.hit ? 1 : 0;
      counters.misses += errors.min_fde > report.key.mr_threshold ? 1 : 0;
    }
  }
  report.steps += 1;
}

// Associative, commutative merge of reports from the same configuration.
inline MetricReport aggregate(const MetricReport& a, const MetricReport& b) {
  if (a.steps == 0 && a.per_type.empty()) {
    MetricReport out = b;
    out.key = b.key;
    out.warning = a.warning || b.warning;
    return out;
  }
  if (b.steps == 0 && b.per_type.empty()) {
    MetricReport out = a;
    out.warning = a.warning || b.warning;
    return out;
  }
  if (!(a.key == b.key)) {
    throw InvalidInputError("aggregate: reports from different configurations");
  }
  MetricReport out = a;
  out.steps += b.steps;
  out.warning = a.warning || b.warning;
  for (const auto& [type, c] : b.per_type) {
    TypeCounters& t = out.per_type[type];
    t.sum_min_ade += c.sum_min_ade;
    t.sum_min_fde += c.sum_min_fde;
    t.matched += c.matched;
    t.misses += c.misses;
    t.hits += c.hits;
    t.false_positives += c.false_positives;
    t.ground_truth += c.ground_truth;
  }
  return out;
}

// (hits - alpha * false positives) / ground truth.
inline double epa_value(const TypeCounters& counters, double alpha) {
  if (counters.ground_truth == 0) return 0.0;
  return (static_cast<double>(counters.hits) -
          alpha * static_cast<double>(counters.false_positives)) /
         static_cast<double>(counters.ground_truth);
}

struct EpaResult {
  std::map<AgentType, double> per_type;  // types with ground truth only
  double mean = 0.0;
};

// Per-type EPA over the accumulated counters and the mean over types that
// have ground truth; false positives of types without any ground truth are
// excluded from the mean and surface through the per-type counters.
inline EpaResult epa(const MetricReport& report, double alpha) {
  EpaResult out;
  int with_gt = 0;
  for (const auto& [type, counters] : report.per_type) {
    if (counters.ground_truth == 0) continue;
    const double value = epa_value(counters, alpha);
    out.per_type[type] = value;
    out.mean += value;
    ++with_gt;
  }
  if (with_gt > 0) out.mean /= with_gt;
  return out;
}

struct MetricValues {
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  double epa = 0.0;
};

struct FinalMetrics {
  MetricValues overall;
  std::map<AgentType, MetricValues> per_type;
};

// minADE / minFDE averaged over matched ground-truth agents, miss rate over
// matched agents, EPA per the accumulated counters.
inline FinalMetrics finalize(const MetricReport& report) {
  FinalMetrics out;
  const EpaResult epa_result = epa(report, report.key.alpha);
  for (const auto& [type, c] : report.per_type) {
    MetricValues values;
    if (c.matched > 0) {
      values.min_ade = c.sum_min_ade / static_cast<double>(c.matched);
      values.min_fde = c.sum_min_fde / static_cast<double>(c.matched);
      values.miss_rate =
          static_cast<double>(c.misses) / static_cast<double>(c.matched);
    }
    const auto it = epa_result.per_type.find(type);
    values.epa = it == epa_result.per_type.end() ? 0.0 : it->second;
    out.per_type[type] = values;
  }
  const TypeCounters totals = report.totals();
  if (totals.matched > 0) {
    out.overall.min_ade = totals.sum_min_ade / static_cast<double>(totals.matched);
    out.overall.min_fde = totals.sum_min_fde / static_cast<double>(totals.matched);
    out.overall.miss_rate =
        static_cast<double>(totals.misses) / static_cast<double>(totals.matched);
  }
  out.overall.epa = epa_result.mean;
  return out;
}

inline std::string agent_type_label(AgentType type) {
  return type == AgentType::kVehicle ? "vehicle" : "pedestrian";
}

namespace detail {

inline std::string format_metric(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", v);
  return buffer;
}

inline void append_metric_rows(std::string& csv, const std::string& label,
                               const MetricValues& values) {
  csv += label + ",minADE," + format_metric(values.min_ade) + "\n";
  csv += label + ",minFDE," + format_metric(values.min_fde) + "\n";
  csv += label + ",MR," + format_metric(values.miss_rate) + "\n";
  csv += label + ",EPA," + format_metric(values.epa) + "\n";
}

}  // namespace detail

// One row per metric per agent type plus the overall rows, in a fixed order.
inline std::string report_to_csv(const MetricReport& report) {
  const FinalMetrics metrics = finalize(report);
  std::string csv = "agent_type,metric,value\n";
  const AgentType order[] = {AgentType::kVehicle, AgentType::kPedestrian};
  for (AgentType type : order) {
    const auto it = metrics.per_type.find(type);
    if (it == metrics.per_type.end()) continue;
    detail::append_metric_rows(csv, agent_type_label(type), it->second);
  }
  detail::append_metric_rows(csv, "overall", metrics.overall);
  return csv;
}

}  // namespace trackcast
