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

// Generates a handful of turn-heavy scenes and compares the query pipeline
// (oracle decoder) against the tracking-by-detection baseline.

#include <iostream>

#include "trackcast/pipeline.hpp"

int main() {
  using namespace trackcast;

  ScenarioConfig scenario;
  scenario.straight_vehicles = 2;
  scenario.turn_left_vehicles = 2;
  scenario.turn_right_vehicles = 1;
  scenario.stopping_pedestrians = 1;
  scenario.crossing_pedestrians = 1;

  std::vector<Scene> scenes;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    scenes.push_back(generate_synthetic(scenario, seed));
  }

  PipelineConfig query;
  query.pipeline = PipelineKind::kQuery;
  query.decoder = DecoderKind::kOracle;

  PipelineConfig traditional = query;
  traditional.pipeline = PipelineKind::kTraditional;

  const auto rows = compare(
      scenes, {{"query-oracle", query}, {"traditional-kalman", traditional}});
  std::cout << compare_table_text(rows);
  return 0;
}
