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

// JSON bindings for pipeline configurations and metric reports.

#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "trackcast/common.hpp"
#include "trackcast/metrics.hpp"
#include "trackcast/pipeline.hpp"

namespace trackcast {

inline std::string pipeline_kind_name(PipelineKind kind) {
  return kind == PipelineKind::kQuery ? "query" : "traditional";
}

inline PipelineKind pipeline_kind_from_name(const std::string& name) {
  if (name == "query") return PipelineKind::kQuery;
  if (name == "traditional") return PipelineKind::kTraditional;
  throw ConfigError("unknown pipeline '" + name + "'");
}

inline std::string decoder_kind_name(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kRegression: return "regression";
    case DecoderKind::kGoal: return "goal";
    case DecoderKind::kHeatmap: return "heatmap";
    case DecoderKind::kOracle: return "oracle";
  }
  return "regression";
}

inline DecoderKind decoder_kind_from_name(const std::string& name) {
  if (name == "regression") return DecoderKind::kRegression;
  if (name == "goal") return DecoderKind::kGoal;
  if (name == "heatmap") return DecoderKind::kHeatmap;
  if (name == "oracle") return DecoderKind::kOracle;
  throw ConfigError("unknown decoder '" + name + "'");
}

inline std::string view_kind_name(ViewKind kind) {
  return kind == ViewKind::kAllocentric ? "allocentric" : "egocentric";
}

inline ViewKind view_kind_from_name(const std::string& name) {
  if (name == "allocentric") return ViewKind::kAllocentric;
  if (name == "egocentric") return ViewKind::kEgocentric;
  throw ConfigError("unknown view '" + name + "'");
}

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return nlohmann::json{
      {"pipeline", pipeline_kind_name(c.pipeline)},
      {"decoder", decoder_kind_name(c.decoder)},
      {"k", c.k},
      {"t_future", c.t_future},
      {"view", view_kind_name(c.view)},
      {"tau_epa", c.tau_epa},
      {"alpha", c.alpha},
      {"mr_threshold", c.mr_threshold},
      {"nms_radius", c.nms_radius},
      {"tau_goal", c.tau_goal},
      {"n_goal", c.n_goal},
      {"r_min", c.r_min},
      {"heatmap_side", c.heatmap_side},
      {"smooth_l1_delta", c.smooth_l1_delta},
      {"decoder_hidden", c.decoder_hidden},
      {"goal_embed_dim", c.goal_embed_dim},
      {"s_bank", c.s_bank},
      {"n_query", c.n_query},
      {"d_h", c.d_h},
      {"d_k", c.d_k},
      {"head_hidden", c.head_hidden},
      {"gather_radius", c.gather_radius},
      {"feature_sigma", c.feature_sigma},
      {"feature_position_scale", c.feature_position_scale},
      {"feature_velocity_scale", c.feature_velocity_scale},
      {"feature_seed", c.feature_seed},
      {"oracle_residual_threshold", c.oracle_residual_threshold},
      {"weight_seed", c.weight_seed},
      {"noise_seed", c.noise_seed},
      {"detection_noise", c.detection_noise},
      {"detection_dropout", c.detection_dropout},
      {"kf_process_noise", c.kf_process_noise},
      {"kf_measurement_noise", c.kf_measurement_noise},
      {"kf_gate", c.kf_gate},
      {"kf_max_misses", c.kf_max_misses}};
}

// Fields absent from the document keep their defaults.
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& doc) {
  PipelineConfig c;
  const auto set_string = [&](const char* key, auto&& apply) {
    if (doc.contains(key)) apply(doc.at(key).template get<std::string>());
  };
  try {
    set_string("pipeline",
               [&](const std::string& v) { c.pipeline = pipeline_kind_from_name(v); });
    set_string("decoder",
               [&](const std::string& v) { c.decoder = decoder_kind_from_name(v); });
    set_string("view",
               [&](const std::string& v) { c.view = view_kind_from_name(v); });
    const auto load = [&](const char* key, auto& field) {
      if (doc.contains(key)) {
        field = doc.at(key)
                    .template get<std::remove_reference_t<decltype(field)>>();
      }
    };
    load("k", c.k);
    load("t_future", c.t_future);
    load("tau_epa", c.tau_epa);
    load("alpha", c.alpha);
    load("mr_threshold", c.mr_threshold);
    load("nms_radius", c.nms_radius);
    load("tau_goal", c.tau_goal);
    load("n_goal", c.n_goal);
    load("r_min", c.r_min);
    load("heatmap_side", c.heatmap_side);
    load("smooth_l1_delta", c.smooth_l1_delta);
    load("decoder_hidden", c.decoder_hidden);
    load("goal_embed_dim", c.goal_embed_dim);
    load("s_bank", c.s_bank);
    load("n_query", c.n_query);
    load("d_h", c.d_h);
    load("d_k", c.d_k);
    load("head_hidden", c.head_hidden);
    load("gather_radius", c.gather_radius);
    load("feature_sigma", c.feature_sigma);
    load("feature_position_scale", c.feature_position_scale);
    load("feature_velocity_scale", c.feature_velocity_scale);
    load("feature_seed", c.feature_seed);
    load("oracle_residual_threshold", c.oracle_residual_threshold);
    load("weight_seed", c.weight_seed);
    load("noise_seed", c.noise_seed);
    load("detection_noise", c.detection_noise);
    load("detection_dropout", c.detection_dropout);
    load("kf_process_noise", c.kf_process_noise);
    load("kf_measurement_noise", c.kf_measurement_noise);
    load("kf_gate", c.kf_gate);
    load("kf_max_misses", c.kf_max_misses);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("pipeline_config", e.what());
  }
  return c;
}

inline nlohmann::json report_to_json(const MetricReport& report,
                                     double mean_total_loss) {
  const FinalMetrics metrics = finalize(report);
  nlohmann::json per_type = nlohmann::json::object();
  for (const auto& [type, values] : metrics.per_type) {
    const TypeCounters& counters = report.per_type.at(type);
    per_type[agent_type_label(type)] = {
        {"minADE", values.min_ade},
        {"minFDE", values.min_fde},
        {"MR", values.miss_rate},
        {"EPA", values.epa},
        {"matched", counters.matched},
        {"hits", counters.hits},
        {"misses", counters.misses},
        {"false_positives", counters.false_positives},
        {"ground_truth", counters.ground_truth}};
  }
  return nlohmann::json{{"steps", report.steps},
                        {"warning", report.warning},
                        {"mean_total_loss", mean_total_loss},
                        {"overall",
                         {{"minADE", metrics.overall.min_ade},
                          {"minFDE", metrics.overall.min_fde},
                          {"MR", metrics.overall.miss_rate},
                          {"EPA", metrics.overall.epa}}},
                        {"per_type", per_type}};
}

}  // namespace trackcast
