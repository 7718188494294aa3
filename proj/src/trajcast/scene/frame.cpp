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

#include "trajcast/scene/frame.hpp"

#include <cmath>
#include <string>

#include "trajcast/core/error.hpp"

namespace trajcast {

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

namespace {

struct Frame {
  double cx, cy;  // ego position
  double c, s;    // cos/sin of ego heading

  void point(double& x, double& y) const {
    const double qx = x - cx, qy = y - cy;
    x = c * qx + s * qy;
    y = -s * qx + c * qy;
  }
  void vector(double& x, double& y) const {
    const double qx = x, qy = y;
    x = c * qx + s * qy;
    y = -s * qx + c * qy;
  }
};

}  // namespace

RawScene to_ego_frame(const RawScene& scene, int ego_index) {
  if (ego_index < 0 ||
      ego_index >= static_cast<int>(scene.agents.size())) {
    throw DataError("to_ego_frame: ego index " + std::to_string(ego_index) +
                    " out of range");
  }
  const AgentTrack& ego = scene.agents[static_cast<size_t>(ego_index)];
  if (!ego.current_valid()) {
    throw DataError("to_ego_frame: ego agent " + std::to_string(ego_index) +
                    " has an invalid current state");
  }
  const double heading = ego.heading.back();
  Frame f{ego.x.back(), ego.y.back(), std::cos(heading), std::sin(heading)};

  RawScene out = scene;
  for (auto& a : out.agents) {
    for (size_t t = 0; t < a.x.size(); ++t) {
      f.point(a.x[t], a.y[t]);
      f.vector(a.vx[t], a.vy[t]);
      f.vector(a.ax[t], a.ay[t]);
      a.heading[t] = wrap_angle(a.heading[t] - heading);
    }
    for (size_t t = 0; t < a.future_x.size(); ++t)
      f.point(a.future_x[t], a.future_y[t]);
  }
  for (auto& seg : out.segments) {
    f.point(seg.ax, seg.ay);
    f.point(seg.bx, seg.by);
  }
  for (auto& l : out.lights) {
    for (size_t t = 0; t < l.x.size(); ++t) f.point(l.x[t], l.y[t]);
  }
  return out;
}

Array<double> ego_frame_future(const SceneTensors& scene) {
  const int64_t a = scene.agents();
  const int64_t tf = scene.future_steps();
  Array<double> out(Shape{a, tf, 2});
  for (int64_t i = 0; i < a; ++i) {
    global_to_ego(scene.poses.ptr() + i * 3, scene.future.ptr() + i * tf * 2,
                  out.ptr() + i * tf * 2, tf);
  }
  return out;
}

void ego_to_global(const double* pose3, const double* xy_in, double* xy_out,
                   int64_t n_points) {
  const double c = std::cos(pose3[2]), s = std::sin(pose3[2]);
  for (int64_t i = 0; i < n_points; ++i) {
    const double x = xy_in[2 * i], y = xy_in[2 * i + 1];
    xy_out[2 * i] = pose3[0] + c * x - s * y;
    xy_out[2 * i + 1] = pose3[1] + s * x + c * y;
  }
}

void global_to_ego(const double* pose3, const double* xy_in, double* xy_out,
                   int64_t n_points) {
  const double c = std::cos(pose3[2]), s = std::sin(pose3[2]);
  for (int64_t i = 0; i < n_points; ++i) {
    const double qx = xy_in[2 * i] - pose3[0];
    const double qy = xy_in[2 * i + 1] - pose3[1];
    xy_out[2 * i] = c * qx + s * qy;
    xy_out[2 * i + 1] = -s * qx + c * qy;
  }
}

}  // namespace trajcast
