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

#include "trajcast/scene/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trajcast/core/error.hpp"
#include "trajcast/scene/frame.hpp"

namespace trajcast {

namespace {

void write_agent_state(const AgentTrack& a, size_t t, double* out) {
  out[0] = a.x[t];
  out[1] = a.y[t];
  out[2] = a.vx[t];
  out[3] = a.vy[t];
  out[4] = a.ax[t];
  out[5] = a.ay[t];
  out[6] = a.length;
  out[7] = a.width;
  out[8] = std::sin(a.heading[t]);
  out[9] = std::cos(a.heading[t]);
}

double hypot2(double x, double y) { return std::sqrt(x * x + y * y); }

}  // namespace

SceneTensors build_scene_tensors(const RawScene& scene,
                                 const std::vector<int>& modeled,
                                 const SceneCaps& caps,
                                 int64_t future_steps) {
  if (modeled.empty()) throw DataError("build_scene_tensors: no agents");
  const int64_t a_count = static_cast<int64_t>(modeled.size());
  const int64_t t_len = scene.agents.at(0).history_len();
  const int64_t s_i = caps.context_agents;
  const int64_t s_r = caps.road_segments;
  const int64_t s_t = caps.traffic_lights;

  SceneTensors out;
  out.history.values = Array<double>({a_count, t_len, 1, kAgentFeatureDim});
  out.history.mask = Mask({a_count, t_len, 1});
  out.interactions.values =
      Array<double>({a_count, t_len, s_i, kAgentFeatureDim});
  out.interactions.mask = Mask({a_count, t_len, s_i});
  out.roadgraph.values = Array<double>({a_count, 1, s_r, kRoadFeatureDim});
  out.roadgraph.mask = Mask({a_count, 1, s_r});
  out.traffic_lights.values =
      Array<double>({a_count, t_len, s_t, kLightFeatureDim});
  out.traffic_lights.mask = Mask({a_count, t_len, s_t});
  out.poses = Array<double>({a_count, 3});
  out.future = Array<double>({a_count, future_steps, 2});

  for (int64_t ai = 0; ai < a_count; ++ai) {
    const int ego_idx = modeled[static_cast<size_t>(ai)];
    const AgentTrack& ego_global = scene.agents.at(static_cast<size_t>(ego_idx));
    out.poses.at(ai, 0) = ego_global.x.back();
    out.poses.at(ai, 1) = ego_global.y.back();
    out.poses.at(ai, 2) = ego_global.heading.back();

    RawScene ego = to_ego_frame(scene, ego_idx);
    const AgentTrack& self = ego.agents[static_cast<size_t>(ego_idx)];

    for (int64_t t = 0; t < t_len; ++t) {
      if (!self.valid[static_cast<size_t>(t)]) continue;
      out.history.mask.at(ai, t, 0) = 1;
      write_agent_state(self, static_cast<size_t>(t),
                        &out.history.values.at(ai, t, 0, 0));
    }

    if (static_cast<int64_t>(self.future_x.size()) < future_steps) {
      throw DataError("build_scene_tensors: agent future shorter than "
                      "requested horizon");
    }
    for (int64_t t = 0; t < future_steps; ++t) {
      // Futures are stored in the global frame.
      out.future.at(ai, t, 0) = ego_global.future_x[static_cast<size_t>(t)];
      out.future.at(ai, t, 1) = ego_global.future_y[static_cast<size_t>(t)];
    }

    // Context agents, ascending current-timestep distance to the ego.
    std::vector<std::pair<double, int>> others;
    for (int j = 0; j < static_cast<int>(ego.agents.size()); ++j) {
      if (j == ego_idx) continue;
      const AgentTrack& c = ego.agents[static_cast<size_t>(j)];
      if (!c.current_valid()) continue;
      others.emplace_back(hypot2(c.x.back(), c.y.back()), j);
    }
    std::stable_sort(others.begin(), others.end());
    for (int64_t s = 0; s < std::min<int64_t>(s_i, others.size()); ++s) {
      const AgentTrack& c = ego.agents[static_cast<size_t>(others[s].second)];
      for (int64_t t = 0; t < t_len; ++t) {
        if (!c.valid[static_cast<size_t>(t)]) continue;
        out.interactions.mask.at(ai, t, s) = 1;
        write_agent_state(c, static_cast<size_t>(t),
                          &out.interactions.values.at(ai, t, s, 0));
      }
    }

    // Road segments by midpoint distance to the ego (origin in this frame).
    std::vector<std::pair<double, int>> segs;
    for (int j = 0; j < static_cast<int>(ego.segments.size()); ++j) {
      const RoadSegment& seg = ego.segments[static_cast<size_t>(j)];
      segs.emplace_back(
          hypot2(0.5 * (seg.ax + seg.bx), 0.5 * (seg.ay + seg.by)), j);
    }
    std::stable_sort(segs.begin(), segs.end());
    for (int64_t s = 0; s < std::min<int64_t>(s_r, segs.size()); ++s) {
      const RoadSegment& seg = ego.segments[static_cast<size_t>(segs[s].second)];
      double* f = &out.roadgraph.values.at(ai, 0, s, 0);
      f[0] = seg.ax;
      f[1] = seg.ay;
      f[2] = seg.bx;
      f[3] = seg.by;
      const double dx = seg.bx - seg.ax, dy = seg.by - seg.ay;
      const double len = hypot2(dx, dy);
      f[4] = len > 0 ? dx / len : 0.0;
      f[5] = len > 0 ? dy / len : 0.0;
      if (seg.type < 0 || seg.type >= kRoadTypeCount) {
        throw DataError("build_scene_tensors: road type out of range");
      }
      f[6 + seg.type] = 1.0;
      out.roadgraph.mask.at(ai, 0, s) = 1;
    }

    // Traffic lights by current distance.
    std::vector<std::pair<double, int>> lights;
    for (int j = 0; j < static_cast<int>(ego.lights.size()); ++j) {
      const LightTrack& l = ego.lights[static_cast<size_t>(j)];
      if (l.valid.empty() || !l.valid.back()) continue;
      lights.emplace_back(hypot2(l.x.back(), l.y.back()), j);
    }
    std::stable_sort(lights.begin(), lights.end());
    for (int64_t s = 0; s < std::min<int64_t>(s_t, lights.size()); ++s) {
      const LightTrack& l = ego.lights[static_cast<size_t>(lights[s].second)];
      for (int64_t t = 0; t < t_len; ++t) {
        if (!l.valid[static_cast<size_t>(t)]) continue;
        double* f = &out.traffic_lights.values.at(ai, t, s, 0);
        f[0] = l.x[static_cast<size_t>(t)];
        f[1] = l.y[static_cast<size_t>(t)];
        const int st = l.state[static_cast<size_t>(t)];
        if (st < 0 || st >= kLightStateCount) {
          throw DataError("build_scene_tensors: light state out of range");
        }
        f[2 + st] = 1.0;
        f[6] = l.confidence[static_cast<size_t>(t)];
        if (f[6] < 0.0 || f[6] > 1.0) {
          throw DataError("build_scene_tensors: light confidence outside "
                          "[0,1]");
        }
        out.traffic_lights.mask.at(ai, t, s) = 1;
      }
    }
  }
  return out;
}

}  // namespace trajcast
