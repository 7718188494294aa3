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

#include "trajcast/synthdata/generator.hpp"

#include <algorithm>
#include <cmath>

#include "trajcast/core/error.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/scene/features.hpp"
#include "trajcast/scene/frame.hpp"

namespace trajcast {

void GeneratorConfig::validate() const {
  if (agents < 1) throw UsageError("generator: agents must be >= 1");
  if (background_agents < 1) {
    throw UsageError("generator: need at least one background agent so the "
                     "interaction modality is never empty");
  }
  if (history_steps < 2) {
    throw UsageError("generator: history must have at least 2 steps");
  }
  if (future_steps < 1) throw UsageError("generator: future_steps >= 1");
  if (dt <= 0) throw UsageError("generator: dt must be positive");
  if (caps.context_agents < 1 || caps.road_segments < 1 ||
      caps.traffic_lights < 1) {
    throw UsageError("generator: slot caps must be >= 1 (lane-tracking "
                     "scenarios need roadgraph segments)");
  }
  double sum = 0;
  for (const auto& [name, w] : scenario_weights) {
    if (w < 0) throw UsageError("generator: negative scenario weight");
    if (std::find(scenario_names().begin(), scenario_names().end(), name) ==
        scenario_names().end()) {
      throw UsageError("generator: unknown scenario '" + name + "'");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("generator: scenario weights must sum to 1");
  }
}

const char* expected_bucket_for_scenario(const std::string& scenario) {
  if (scenario == "left_turn") return "left_turn";
  if (scenario == "right_turn") return "right_turn";
  if (scenario == "stop") return "stationary";
  return "straight";  // straight and yield
}

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

struct Profile {
  // Curvature and acceleration as piecewise-constant step functions over
  // the whole simulated span (history then future).
  std::vector<double> kappa, accel;
};

// Builds the control profile for one scenario. `t_hist` counts steps
// before the current state, `t_fut` steps after.
Profile scenario_profile(const std::string& scenario, double v0,
                         int64_t t_hist, int64_t t_fut, double dt) {
  const int64_t total = t_hist + t_fut;
  Profile p;
  p.kappa.assign(static_cast<size_t>(total), 0.0);
  p.accel.assign(static_cast<size_t>(total), 0.0);
  if (scenario == "left_turn" || scenario == "right_turn") {
    const double span = static_cast<double>(t_fut) * dt;
    const double k = kHalfPi / (v0 * span) *
                     (scenario == "left_turn" ? 1.0 : -1.0);
    for (int64_t i = t_hist; i < total; ++i)
      p.kappa[static_cast<size_t>(i)] = k;
  } else if (scenario == "stop") {
    // Brake through the history so the agent is nearly stopped "now" and
    // holds still over the future.
    const double brake = -v0 / (static_cast<double>(t_hist) * dt);
    for (int64_t i = 0; i < t_hist; ++i)
      p.accel[static_cast<size_t>(i)] = brake * 0.95;
    for (int64_t i = t_hist; i < total; ++i)
      p.accel[static_cast<size_t>(i)] = -2.0 * v0;  // clamp to zero below
  } else if (scenario == "yield") {
    // Slow to half speed approaching the light, then recover.
    const double brake = -0.5 * v0 / (static_cast<double>(t_hist) * dt);
    for (int64_t i = 0; i < t_hist; ++i)
      p.accel[static_cast<size_t>(i)] = brake;
    const double recover = 0.5 * v0 / (static_cast<double>(t_fut) * dt);
    for (int64_t i = t_hist; i < total; ++i)
      p.accel[static_cast<size_t>(i)] = recover;
  }
  return p;
}

struct SimResult {
  AgentTrack track;         // history + future filled
  std::vector<double> clean_x, clean_y;  // full path, history + future
};

// Unicycle rollout from a start pose chosen so the CURRENT state lands at
// (x0, y0, heading0, v0-ish). We simulate forward from t = -(T-1) dt.
SimResult simulate_agent(const std::string& scenario, double x0, double y0,
                         double heading0, double v0, int64_t t_hist_total,
                         int64_t t_fut, double dt, Rng& rng,
                         double noise_pos, double noise_speed) {
  const int64_t pre = t_hist_total - 1;  // steps before current
  Profile prof = scenario_profile(scenario, v0, pre, t_fut, dt);

  // Roll the start state backwards along a straight line at the initial
  // speed; maneuvers happen at or after the current step for turns, and
  // braking during history is integrated forward from that start.
  double v_start = v0;
  if (scenario == "stop") v_start = v0;  // braking profile handles decay
  double x = x0 - v_start * std::cos(heading0) * static_cast<double>(pre) * dt;
  double y = y0 - v_start * std::sin(heading0) * static_cast<double>(pre) * dt;
  double theta = heading0;
  double v = v_start;

  const int64_t total = t_hist_total + t_fut;
  std::vector<double> xs, ys, ths, vs;
  xs.reserve(static_cast<size_t>(total));
  for (int64_t i = 0; i < total; ++i) {
    xs.push_back(x);
    ys.push_back(y);
    ths.push_back(theta);
    vs.push_back(v);
    if (i + 1 == total) break;
    const double k = prof.kappa[static_cast<size_t>(std::min(
        i, static_cast<int64_t>(prof.kappa.size()) - 1))];
    const double a = prof.accel[static_cast<size_t>(std::min(
        i, static_cast<int64_t>(prof.accel.size()) - 1))];
    x += v * std::cos(theta) * dt;
    y += v * std::sin(theta) * dt;
    theta = wrap_angle(theta + k * v * dt);
    v = std::max(0.0, v + a * dt);
  }

  SimResult res;
  res.clean_x = xs;
  res.clean_y = ys;
  AgentTrack& tr = res.track;
  tr.length = 4.5;
  tr.width = 2.0;
  for (int64_t i = 0; i < t_hist_total; ++i) {
    const size_t si = static_cast<size_t>(i);
    const double nx = rng.normal() * noise_pos;
    const double ny = rng.normal() * noise_pos;
    tr.x.push_back(xs[si] + nx);
    tr.y.push_back(ys[si] + ny);
    const double sv = vs[si] + rng.normal() * noise_speed;
    tr.vx.push_back(sv * std::cos(ths[si]));
    tr.vy.push_back(sv * std::sin(ths[si]));
    const size_t prev = si > 0 ? si - 1 : si;
    const double accel = (vs[si] - vs[prev]) / dt;
    tr.ax.push_back(accel * std::cos(ths[si]));
    tr.ay.push_back(accel * std::sin(ths[si]));
    tr.heading.push_back(ths[si]);
    tr.valid.push_back(1);
  }
  for (int64_t i = t_hist_total; i < total; ++i) {
    const size_t si = static_cast<size_t>(i);
    tr.future_x.push_back(xs[si]);
    tr.future_y.push_back(ys[si]);
  }
  return res;
}

// Lane centerline segments along a clean path, plus a parallel road edge.
void add_lane_segments(RawScene& scene, const std::vector<double>& px,
                       const std::vector<double>& py) {
  const size_t n = px.size();
  if (n < 2) return;
  const size_t stride = std::max<size_t>(1, n / 6);
  for (size_t i = 0; i + stride < n; i += stride) {
    RoadSegment seg;
    seg.ax = px[i];
    seg.ay = py[i];
    seg.bx = px[i + stride];
    seg.by = py[i + stride];
    seg.type = 0;  // lane center
    scene.segments.push_back(seg);
    const double dx = seg.bx - seg.ax, dy = seg.by - seg.ay;
    const double len = std::hypot(dx, dy);
    if (len > 1e-9) {
      const double ox = -dy / len * 1.75, oy = dx / len * 1.75;
      scene.segments.push_back(RoadSegment{seg.ax + ox, seg.ay + oy,
                                           seg.bx + ox, seg.by + oy, 1});
    }
  }
}

std::string pick_scenario(const GeneratorConfig& cfg, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0;
  for (const std::string& name : scenario_names()) {
    auto it = cfg.scenario_weights.find(name);
    if (it == cfg.scenario_weights.end()) continue;
    acc += it->second;
    if (u < acc) return name;
  }
  return "straight";
}

}  // namespace

SceneTensors generate_scene(const GeneratorConfig& cfg, int64_t scene_index) {
  cfg.validate();
  Rng rng = Rng::derive(cfg.seed, static_cast<uint64_t>(scene_index));

  RawScene scene;
  std::vector<std::string> labels;
  std::vector<int> modeled;
  int branch_taken = -1;
  Array<double> branch_endpoints;

  const int64_t t_hist = cfg.history_steps;
  const int64_t t_fut = cfg.future_steps;

  for (int64_t ai = 0; ai < cfg.agents; ++ai) {
    const std::string scenario =
        cfg.bimodal ? "straight" : pick_scenario(cfg, rng);
    const double v0 = rng.uniform(4.0, 12.0);
    const double x0 = rng.uniform(-30.0, 30.0);
    const double y0 = static_cast<double>(ai) * 12.0 + rng.uniform(-4.0, 4.0);
    const double h0 = rng.uniform(-M_PI, M_PI);

    if (cfg.bimodal && ai == 0) {
      Rng branch_rng = rng;  // same state for both branches
      SimResult straight =
          simulate_agent("straight", x0, y0, h0, v0, t_hist, t_fut,
                         cfg.dt, branch_rng, cfg.noise_position,
                         cfg.noise_speed);
      Rng branch_rng2 = rng;
      SimResult turn =
          simulate_agent("left_turn", x0, y0, h0, v0, t_hist, t_fut,
                         cfg.dt, branch_rng2, cfg.noise_position,
                         cfg.noise_speed);
      rng = branch_rng;  // keep one consistent stream
      branch_taken = rng.uniform() < 0.5 ? 0 : 1;
      branch_endpoints = Array<double>({2, 2});
      branch_endpoints.at(0, 0) = straight.track.future_x.back();
      branch_endpoints.at(0, 1) = straight.track.future_y.back();
      branch_endpoints.at(1, 0) = turn.track.future_x.back();
      branch_endpoints.at(1, 1) = turn.track.future_y.back();
      SimResult& taken = branch_taken == 0 ? straight : turn;
      scene.agents.push_back(taken.track);
      add_lane_segments(scene, straight.clean_x, straight.clean_y);
      add_lane_segments(scene, turn.clean_x, turn.clean_y);
      labels.push_back(branch_taken == 0 ? "straight" : "left_turn");
    } else {
      SimResult sim = simulate_agent(scenario, x0, y0, h0, v0, t_hist,
                                     t_fut, cfg.dt, rng, cfg.noise_position,
                                     cfg.noise_speed);
      scene.agents.push_back(sim.track);
      add_lane_segments(scene, sim.clean_x, sim.clean_y);
      labels.push_back(scenario);
    }
    modeled.push_back(static_cast<int>(ai));

    // Traffic light gating the maneuver: red for stop, yellow for yield,
    // green otherwise, placed ahead along the current heading.
    LightTrack light;
    const std::string& label = labels.back();
    const int state = label == "stop" ? 0 : (label == "yield" ? 1 : 2);
    const double ahead = label == "stop" ? 3.0 : 15.0;
    const AgentTrack& tr = scene.agents.back();
    const double lx = tr.x.back() + std::cos(tr.heading.back()) * ahead;
    const double ly = tr.y.back() + std::sin(tr.heading.back()) * ahead;
    for (int64_t t = 0; t < t_hist; ++t) {
      light.x.push_back(lx);
      light.y.push_back(ly);
      light.state.push_back(state);
      light.confidence.push_back(1.0);
      light.valid.push_back(1);
    }
    scene.lights.push_back(std::move(light));
  }

  // Background agents: straight drivers near agent 0 so every modeled
  // agent has context.
  const AgentTrack& anchor = scene.agents.front();
  for (int64_t bi = 0; bi < cfg.background_agents; ++bi) {
    const double ahead = 12.0 + 8.0 * static_cast<double>(bi);
    const double hx =
        anchor.x.back() + std::cos(anchor.heading.back()) * ahead;
    const double hy =
        anchor.y.back() + std::sin(anchor.heading.back()) * ahead;
    const double bv = rng.uniform(3.0, 10.0);
    Rng bg_rng = rng;
    SimResult sim = simulate_agent("straight", hx, hy, anchor.heading.back(),
                                   bv, t_hist, t_fut, cfg.dt, bg_rng,
                                   cfg.noise_position, cfg.noise_speed);
    rng = bg_rng;
    scene.agents.push_back(sim.track);
  }

  SceneTensors tensors = build_scene_tensors(scene, modeled, cfg.caps, t_fut);
  tensors.scene_id = scene_index;
  tensors.ego_index = 0;
  tensors.scenario = labels;
  tensors.branch_taken = branch_taken;
  if (branch_taken >= 0) tensors.branch_endpoints = branch_endpoints;
  return tensors;
}

std::vector<SceneTensors> generate_scenes(const GeneratorConfig& cfg,
                                          int64_t n_scenes) {
  if (n_scenes < 1) throw UsageError("generator: n_scenes must be >= 1");
  std::vector<SceneTensors> out;
  out.reserve(static_cast<size_t>(n_scenes));
  for (int64_t i = 0; i < n_scenes; ++i) out.push_back(generate_scene(cfg, i));
  return out;
}

}  // namespace trajcast
