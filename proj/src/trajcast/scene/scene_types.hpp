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

#ifndef TRAJCAST_SCENE_SCENE_TYPES_HPP_
#define TRAJCAST_SCENE_SCENE_TYPES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/core/array.hpp"

namespace trajcast {

// Input modalities. Every modality tensor follows the [A, T, S, D] axis
// convention; modalities without a time axis carry T = 1 for homogeneity.
enum class ModalityId : int {
  kHistory = 0,
  kInteractions = 1,
  kRoadgraph = 2,
  kTrafficLights = 3,
};

inline const char* modality_name(ModalityId m) {
  switch (m) {
    case ModalityId::kHistory: return "history";
    case ModalityId::kInteractions: return "interactions";
    case ModalityId::kRoadgraph: return "roadgraph";
    case ModalityId::kTrafficLights: return "traffic_lights";
  }
  return "?";
}

// Feature layouts. Agent-state features are shared between the history and
// interaction modalities.
//   agent state: x, y, vx, vy, ax, ay, length, width, sin(heading),
//                cos(heading)
//   roadgraph:   ax, ay, bx, by, ux, uy, one-hot type (lane, edge,
//                crosswalk)
//   lights:      x, y, one-hot state (red, yellow, green, unknown),
//                confidence
inline constexpr int64_t kAgentFeatureDim = 10;
inline constexpr int64_t kRoadFeatureDim = 9;
inline constexpr int64_t kRoadTypeCount = 3;
inline constexpr int64_t kLightFeatureDim = 7;
inline constexpr int64_t kLightStateCount = 4;

inline int64_t modality_feature_dim(ModalityId m) {
  switch (m) {
    case ModalityId::kHistory:
    case ModalityId::kInteractions: return kAgentFeatureDim;
    case ModalityId::kRoadgraph: return kRoadFeatureDim;
    case ModalityId::kTrafficLights: return kLightFeatureDim;
  }
  return 0;
}

// One modality of one scene: values [A, T, S, D_m] plus validity [A, T, S].
struct ModalityTensor {
  Array<double> values;
  Mask mask;

  int64_t agents() const { return values.dim(0); }
  int64_t timesteps() const { return values.dim(1); }
  int64_t slots() const { return values.dim(2); }
  int64_t features() const { return values.dim(3); }
};

// Global-frame scene as simulated or ingested, before any per-agent
// preprocessing. The last history index is the current timestep.
struct AgentTrack {
  std::vector<double> x, y, vx, vy, ax, ay, heading;
  std::vector<uint8_t> valid;
  double length = 0.0, width = 0.0;
  std::vector<double> future_x, future_y;

  int64_t history_len() const { return static_cast<int64_t>(x.size()); }
  bool current_valid() const {
    return !valid.empty() && valid.back() != 0;
  }
};

struct RoadSegment {
  double ax = 0, ay = 0, bx = 0, by = 0;
  int type = 0;  // index into the road one-hot
};

struct LightTrack {
  std::vector<double> x, y;
  std::vector<int> state;  // index into the light one-hot
  std::vector<double> confidence;
  std::vector<uint8_t> valid;
};

struct RawScene {
  std::vector<AgentTrack> agents;
  std::vector<RoadSegment> segments;
  std::vector<LightTrack> lights;
};

// Per-slot caps; absent entries are zero-valued with mask false, and
// candidates are kept closest-first.
struct SceneCaps {
  int64_t context_agents = 4;
  int64_t road_segments = 16;
  int64_t traffic_lights = 2;
};

// Model-ready tensors for one scene. Each agent's slice of every modality
// is expressed in that agent's own frame (current pose at the origin,
// heading zero); poses and futures stay in the global scene frame so
// trajectories can be mapped back for cross-agent metrics.
struct SceneTensors {
  ModalityTensor history;         // [A, T, 1, 10]
  ModalityTensor interactions;    // [A, T, S_i, 10]
  ModalityTensor roadgraph;       // [A, 1, S_r, 9]
  ModalityTensor traffic_lights;  // [A, T, S_tls, 7]
  Array<double> poses;            // [A, 3] global (x, y, heading)
  Array<double> future;           // [A, T_f, 2] global frame
  std::vector<std::string> scenario;  // per-agent label, may be empty
  int64_t scene_id = 0;
  int ego_index = 0;  // designated primary agent among the modeled ones
  // Bimodal scenes record which branch the ground truth took and both
  // candidate endpoints in the global frame.
  int branch_taken = -1;
  Array<double> branch_endpoints;  // [2, 2] when bimodal, else empty

  int64_t agents() const { return history.values.dim(0); }
  int64_t history_steps() const { return history.values.dim(1); }
  int64_t future_steps() const { return future.dim(1); }

  const ModalityTensor& modality(ModalityId m) const {
    switch (m) {
      case ModalityId::kHistory: return history;
      case ModalityId::kInteractions: return interactions;
      case ModalityId::kRoadgraph: return roadgraph;
      case ModalityId::kTrafficLights: return traffic_lights;
    }
    return history;
  }
};

// Ground-truth futures mapped into each agent's own frame, [A, T_f, 2].
Array<double> ego_frame_future(const SceneTensors& scene);

// Maps one agent's ego-frame trajectory back to the global scene frame.
void ego_to_global(const double* pose3, const double* xy_in, double* xy_out,
                   int64_t n_points);
void global_to_ego(const double* pose3, const double* xy_in, double* xy_out,
                   int64_t n_points);

}  // namespace trajcast

#endif  // TRAJCAST_SCENE_SCENE_TYPES_HPP_
