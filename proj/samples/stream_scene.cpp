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

// Steps the query pipeline through one scene frame by frame and prints the
// tracked agents with their top predicted endpoint.

#include <cstdio>

#include "trackcast/pipeline.hpp"

int main() {
  using namespace trackcast;

  ScenarioConfig scenario;
  scenario.straight_vehicles = 1;
  scenario.turn_left_vehicles = 1;
  const Scene scene = generate_synthetic(scenario, 7);

  PipelineConfig config;
  config.decoder = DecoderKind::kOracle;

  const auto frames = attach_features(scene, config);
  QueryPipelineState state = make_query_state(scene, config);
  for (const FrameObservation& frame : frames) {
    const StepResult step = step_query_pipeline(state, frame, config);
    std::printf("frame %2d:", frame.index);
    for (const PredictedAgent& agent : step.agents) {
      const Trajectory& top = agent.prediction.modes[agent.prediction.top_mode()];
      std::printf("  [track %lld at (%.1f, %.1f) -> (%.1f, %.1f)]",
                  static_cast<long long>(agent.track_id),
                  agent.current_position.x, agent.current_position.y,
                  top.points.back().x, top.points.back().y);
    }
    std::printf("\n");
  }
  return 0;
}
