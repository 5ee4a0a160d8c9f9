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

// trackcast CLI: generate synthetic scenes, run a pipeline over scene files,
// compare pipeline configurations, and validate scenario files.
// Exit codes: 0 success, 2 validation/configuration error, 1 runtime error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "trackcast/pipeline.hpp"
#include "trackcast/pipeline_io.hpp"
#include "trackcast/scenario_io.hpp"

namespace {

using namespace trackcast;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

// Locates --config <file> in argv for the given subcommand.
std::string find_config_argument(int argc, char** argv, const char* subcommand) {
  if (argc < 2 || std::string(argv[1]) != subcommand) return {};
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

// Applies --config <file> before CLI11 binds option defaults, so explicit
// flags override file values.
PipelineConfig preload_config(int argc, char** argv) {
  const std::string path = find_config_argument(argc, argv, "run");
  if (path.empty()) return {};
  try {
    return pipeline_config_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("pipeline_config", e.what());
  }
}

ScenarioConfig preload_scenario_config(int argc, char** argv) {
  const std::string path = find_config_argument(argc, argv, "generate");
  if (path.empty()) return {};
  try {
    return scenario_config_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario_config", e.what());
  }
}

void add_pipeline_options(CLI::App* cmd, PipelineConfig& cfg,
                          std::string& pipeline_name, std::string& decoder_name,
                          std::string& view_name, std::string& config_path) {
  cmd->add_option("--config", config_path, "pipeline config JSON file");
  cmd->add_option("--pipeline", pipeline_name, "query | traditional");
  cmd->add_option("--decoder", decoder_name,
                  "regression | goal | heatmap | oracle");
  cmd->add_option("--view", view_name, "allocentric | egocentric");
  cmd->add_option("--k", cfg.k, "prediction modes per agent");
  cmd->add_option("--t_future", cfg.t_future, "future horizon in frames");
  cmd->add_option("--tau_epa", cfg.tau_epa, "EPA matching threshold, m");
  cmd->add_option("--alpha", cfg.alpha, "EPA false-positive penalty");
  cmd->add_option("--mr_threshold", cfg.mr_threshold, "miss-rate threshold, m");
  cmd->add_option("--nms_radius", cfg.nms_radius, "goal NMS radius, m");
  cmd->add_option("--tau_goal", cfg.tau_goal, "goal positive-label radius, m");
  cmd->add_option("--n_goal", cfg.n_goal, "sampled goal candidates");
  cmd->add_option("--r_min", cfg.r_min, "minimum goal sampling radius, m");
  cmd->add_option("--heatmap_side", cfg.heatmap_side, "heatmap region side, m");
  cmd->add_option("--smooth_l1_delta", cfg.smooth_l1_delta, "smooth-L1 delta");
  cmd->add_option("--decoder_hidden", cfg.decoder_hidden, "decoder hidden size");
  cmd->add_option("--goal_embed_dim", cfg.goal_embed_dim, "goal embedding size");
  cmd->add_option("--s_bank", cfg.s_bank, "memory bank capacity");
  cmd->add_option("--n_query", cfg.n_query, "agent query count");
  cmd->add_option("--d_h", cfg.d_h, "query feature width");
  cmd->add_option("--d_k", cfg.d_k, "attention key width");
  cmd->add_option("--head_hidden", cfg.head_hidden, "decode head hidden size");
  cmd->add_option("--gather_radius", cfg.gather_radius,
                  "feature gather radius, m");
  cmd->add_option("--feature_sigma", cfg.feature_sigma,
                  "feature oracle noise stddev");
  cmd->add_option("--feature_seed", cfg.feature_seed, "feature oracle seed");
  cmd->add_option("--oracle_residual_threshold", cfg.oracle_residual_threshold,
                  "oracle inversion fallback threshold");
  cmd->add_option("--weight_seed", cfg.weight_seed, "seed for all weights");
  cmd->add_option("--noise_seed", cfg.noise_seed,
                  "seed for noise and goal sampling");
  cmd->add_option("--detection_noise", cfg.detection_noise,
                  "detector position noise stddev, m");
  cmd->add_option("--detection_dropout", cfg.detection_dropout,
                  "detector dropout probability");
  cmd->add_option("--kf_process_noise", cfg.kf_process_noise,
                  "kalman accel noise, m/s^2");
  cmd->add_option("--kf_measurement_noise", cfg.kf_measurement_noise,
                  "kalman measurement noise, m");
  cmd->add_option("--kf_gate", cfg.kf_gate, "association gate, m");
  cmd->add_option("--kf_max_misses", cfg.kf_max_misses,
                  "misses before track death");
}

void finish_pipeline_config(PipelineConfig& cfg, const std::string& pipeline_name,
                            const std::string& decoder_name,
                            const std::string& view_name) {
  if (!pipeline_name.empty()) cfg.pipeline = pipeline_kind_from_name(pipeline_name);
  if (!decoder_name.empty()) cfg.decoder = decoder_kind_from_name(decoder_name);
  if (!view_name.empty()) cfg.view = view_kind_from_name(view_name);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"streaming tracking-and-prediction evaluation"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "generate synthetic scenes");
  ScenarioConfig scenario = preload_scenario_config(argc, argv);
  std::uint64_t gen_seed = 0;
  int gen_count = 1;
  std::string gen_out = "scene.json";
  std::string gen_config_path;
  generate->add_option("--config", gen_config_path,
                       "scenario config JSON file");
  generate->add_option("--straight_vehicles", scenario.straight_vehicles, "");
  generate->add_option("--turn_left_vehicles", scenario.turn_left_vehicles, "");
  generate->add_option("--turn_right_vehicles", scenario.turn_right_vehicles, "");
  generate->add_option("--stopping_pedestrians", scenario.stopping_pedestrians, "");
  generate->add_option("--crossing_pedestrians", scenario.crossing_pedestrians, "");
  generate->add_option("--frame_count", scenario.frame_count, "");
  generate->add_option("--position_noise", scenario.position_noise, "");
  generate->add_option("--vehicle_speed", scenario.vehicle_speed, "");
  generate->add_option("--pedestrian_speed", scenario.pedestrian_speed, "");
  generate->add_option("--turn_rate", scenario.turn_rate, "rad/s");
  generate->add_option("--turn_start_frame", scenario.turn_start_frame, "");
  generate->add_option("--stop_start_frame", scenario.stop_start_frame, "");
  generate->add_option("--occluded_straight_vehicles",
                       scenario.occluded_straight_vehicles, "");
  generate->add_option("--occlusion_start", scenario.occlusion_start, "");
  generate->add_option("--occlusion_length", scenario.occlusion_length, "");
  generate->add_option("--map_lanes", scenario.map_lanes, "");
  generate->add_option("--seed", gen_seed, "base seed");
  generate->add_option("--count", gen_count, "number of scenes");
  generate->add_option("--out", gen_out, "output file (count=1) or directory");

  // run
  auto* run = app.add_subcommand("run", "run one pipeline over scene files");
  PipelineConfig run_cfg = preload_config(argc, argv);
  std::string run_pipeline_name, run_decoder_name, run_view_name, run_config_path;
  std::vector<std::string> run_scenes;
  std::string run_out;
  std::string run_format = "text";
  run->add_option("--scene", run_scenes, "scene files")->required();
  run->add_option("--out", run_out, "output path (default stdout)");
  run->add_option("--format", run_format, "text | csv | json");
  add_pipeline_options(run, run_cfg, run_pipeline_name, run_decoder_name,
                       run_view_name, run_config_path);

  // compare
  auto* cmp = app.add_subcommand("compare", "compare pipeline configurations");
  std::vector<std::string> cmp_scenes;
  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  std::string cmp_format = "text";
  cmp->add_option("--scene", cmp_scenes, "scene files")->required();
  cmp->add_option("--config", cmp_configs, "pipeline config JSON files")
      ->required();
  cmp->add_option("--out", cmp_out, "output path (default stdout)");
  cmp->add_option("--format", cmp_format, "text | csv");

  // validate
  auto* validate = app.add_subcommand("validate", "schema-check scenario files");
  std::vector<std::string> validate_paths;
  validate->add_option("files", validate_paths, "scene files")->required();

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    scenario.validate();
    if (gen_count < 1) throw ConfigError("count must be >= 1");
    if (gen_count == 1) {
      const Scene scene = generate_synthetic(scenario, gen_seed);
      write_file(gen_out, save_scene(scene));
      std::cout << "wrote " << gen_out << "\n";
    } else {
      std::filesystem::create_directories(gen_out);
      for (int i = 0; i < gen_count; ++i) {
        const Scene scene = generate_synthetic(scenario, gen_seed + i);
        char name[64];
        std::snprintf(name, sizeof(name), "scene_%04llu.json",
                      static_cast<unsigned long long>(gen_seed + i));
        const auto path = std::filesystem::path(gen_out) / name;
        write_file(path.string(), save_scene(scene));
      }
      std::cout << "wrote " << gen_count << " scenes to " << gen_out << "\n";
    }
    return 0;
  }

  if (run->parsed()) {
    finish_pipeline_config(run_cfg, run_pipeline_name, run_decoder_name,
                           run_view_name);
    run_cfg.validate();
    MetricReport merged;
    merged.key = run_cfg.metric_key();
    double loss_sum = 0.0;
    int scenes_evaluated = 0;
    for (const std::string& path : run_scenes) {
      const Scene scene = load_scene(read_file(path));
      const EvalOutcome outcome = evaluate_stream(scene, run_cfg);
      merged = aggregate(merged, outcome.report);
      loss_sum += outcome.mean_total_loss;
      ++scenes_evaluated;
    }
    const double mean_loss =
        scenes_evaluated > 0 ? loss_sum / scenes_evaluated : 0.0;
    if (run_format == "csv") {
      emit(run_out, report_to_csv(merged));
    } else if (run_format == "json") {
      emit(run_out, report_to_json(merged, mean_loss).dump(2) + "\n");
    } else if (run_format == "text") {
      const FinalMetrics metrics = finalize(merged);
      char line[256];
      std::snprintf(line, sizeof(line),
                    "steps %lld  minADE %.4f  minFDE %.4f  MR %.4f  EPA %.4f  "
                    "total_loss %.4f\n",
                    static_cast<long long>(merged.steps),
                    metrics.overall.min_ade, metrics.overall.min_fde,
                    metrics.overall.miss_rate, metrics.overall.epa, mean_loss);
      emit(run_out, line);
    } else {
      throw ConfigError("unknown format '" + run_format + "'");
    }
    return 0;
  }

  if (cmp->parsed()) {
    std::vector<Scene> scenes;
    for (const std::string& path : cmp_scenes) {
      scenes.push_back(load_scene(read_file(path)));
    }
    std::vector<CompareEntry> entries;
    for (const std::string& path : cmp_configs) {
      CompareEntry entry;
      entry.label = std::filesystem::path(path).stem().string();
      try {
        entry.config =
            pipeline_config_from_json(nlohmann::json::parse(read_file(path)));
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path, e.what());
      }
      entries.push_back(std::move(entry));
    }
    const std::vector<CompareRow> rows = compare(scenes, entries);
    if (cmp_format == "csv") {
      emit(cmp_out, compare_table_csv(rows));
    } else if (cmp_format == "text") {
      emit(cmp_out, compare_table_text(rows));
    } else {
      throw ConfigError("unknown format '" + cmp_format + "'");
    }
    return 0;
  }

  if (validate->parsed()) {
    for (const std::string& path : validate_paths) {
      load_scene(read_file(path));
      std::cout << path << ": ok\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const VersionError& e) {
    std::cerr << "version error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
