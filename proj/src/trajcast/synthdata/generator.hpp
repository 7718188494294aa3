/* Copyright 2026 The Trajcast Authors. All Rights Reserved.

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

#ifndef TRAJCAST_SYNTHDATA_GENERATOR_HPP_
#define TRAJCAST_SYNTHDATA_GENERATOR_HPP_

#include <map>
#include <string>
#include <vector>

#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"straight", "left_turn",
                                              "right_turn", "stop", "yield"};
  return names;
}

// Synthetic scene generation. Agents follow unicycle kinematics along lane
// centerlines that become the roadgraph; traffic lights gate the stop and
// yield scenarios. Every scene contains at least one context agent and one
// traffic light so no modality is ever empty. Scenes are generated from
// per-scene derived seeds, so generation order never matters and the same
// (seed, index) always produces the same bytes.
struct GeneratorConfig {
  uint64_t seed = 1;
  int64_t agents = 1;             // modeled agents A
  int64_t background_agents = 1;  // context-only agents
  int64_t history_steps = 5;      // T, including the current step
  int64_t future_steps = 8;       // T_f
  SceneCaps caps;
  double dt = 0.2;
  std::map<std::string, double> scenario_weights = {
      {"straight", 0.4}, {"left_turn", 0.2}, {"right_turn", 0.2},
      {"stop", 0.1},     {"yield", 0.1}};
  double noise_position = 0.05;
  double noise_speed = 0.0;  // extra jitter on observed velocities
  // Bimodal scenes: the ground-truth future is a fair coin between a
  // straight branch and a left-turn branch with well-separated endpoints.
  bool bimodal = false;

  void validate() const;
};

// The bucket each scenario should land in under the metrics module's
// behavior rule (stop is stationary, yield reads as straight).
const char* expected_bucket_for_scenario(const std::string& scenario);

SceneTensors generate_scene(const GeneratorConfig& cfg, int64_t scene_index);
std::vector<SceneTensors> generate_scenes(const GeneratorConfig& cfg,
                                          int64_t n_scenes);

}  // namespace trajcast

#endif  // TRAJCAST_SYNTHDATA_GENERATOR_HPP_
