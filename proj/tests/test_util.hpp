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

#ifndef TRAJCAST_TESTS_TEST_UTIL_HPP_
#define TRAJCAST_TESTS_TEST_UTIL_HPP_

#include <string>
#include <vector>

#include "trajcast/model/model.hpp"
#include "trajcast/objective/objective.hpp"
#include "trajcast/scene/frame.hpp"

namespace trajcast::testing {

inline SceneDims toy_dims(int64_t t = 3, int64_t s_i = 2, int64_t s_r = 2,
                          int64_t s_t = 1) {
  SceneDims d;
  d.t_history = t;
  d.s_interactions = s_i;
  d.s_roadgraph = s_r;
  d.s_lights = s_t;
  return d;
}

inline ModelConfig toy_model_config(const SceneDims& dims,
                                    FusionKind fusion = FusionKind::kEarly,
                                    AttnRegime regime = AttnRegime::kMultiAxis,
                                    int64_t depth = 2, int64_t hidden = 8,
                                    int64_t modes = 2, int64_t t_f = 2) {
  ModelConfig cfg;
  cfg.dims = dims;
  cfg.encoder.fusion = fusion;
  cfg.encoder.regime = regime;
  cfg.encoder.depth = depth;
  cfg.encoder.block.hidden = hidden;
  cfg.encoder.block.heads = 2;
  cfg.encoder.block.intermediate = 2 * hidden;
  cfg.decoder_depth = 1;
  cfg.modes = modes;
  cfg.future_steps = t_f;
  return cfg;
}

// Hand-built scene with every mask valid and small random features.
// Headings are encoded properly so scene-type invariants hold.
inline SceneTensors toy_scene(const SceneDims& d, int64_t agents, int64_t t_f,
                              Rng& rng) {
  SceneTensors s;
  auto fill = [&](Array<double>& a, double scale) {
    for (int64_t i = 0; i < a.size(); ++i) a[i] = rng.normal() * scale;
  };
  auto agent_features = [&](Array<double>& values, int64_t slots) {
    for (int64_t a = 0; a < agents; ++a)
      for (int64_t t = 0; t < d.t_history; ++t)
        for (int64_t sl = 0; sl < slots; ++sl) {
          double* f = &values.at(a, t, sl, 0);
          f[0] = rng.normal() * 5;
          f[1] = rng.normal() * 5;
          f[2] = rng.normal();
          f[3] = rng.normal();
          f[4] = rng.normal() * 0.3;
          f[5] = rng.normal() * 0.3;
          f[6] = 4.5;
          f[7] = 2.0;
          const double h = rng.uniform(-M_PI, M_PI);
          f[8] = std::sin(h);
          f[9] = std::cos(h);
        }
  };

  s.history.values = Array<double>({agents, d.t_history, 1, kAgentFeatureDim});
  s.history.mask = Mask::full({agents, d.t_history, 1}, 1);
  agent_features(s.history.values, 1);

  s.interactions.values =
      Array<double>({agents, d.t_history, d.s_interactions, kAgentFeatureDim});
  s.interactions.mask = Mask::full({agents, d.t_history, d.s_interactions}, 1);
  agent_features(s.interactions.values, d.s_interactions);

  s.roadgraph.values =
      Array<double>({agents, 1, d.s_roadgraph, kRoadFeatureDim});
  s.roadgraph.mask = Mask::full({agents, 1, d.s_roadgraph}, 1);
  fill(s.roadgraph.values, 3.0);

  s.traffic_lights.values =
      Array<double>({agents, d.t_history, d.s_lights, kLightFeatureDim});
  s.traffic_lights.mask = Mask::full({agents, d.t_history, d.s_lights}, 1);
  fill(s.traffic_lights.values, 1.0);
  // clamp confidences into [0,1]
  for (int64_t a = 0; a < agents; ++a)
    for (int64_t t = 0; t < d.t_history; ++t)
      for (int64_t sl = 0; sl < d.s_lights; ++sl)
        s.traffic_lights.values.at(a, t, sl, 6) = rng.uniform();

  s.poses = Array<double>({agents, 3});
  fill(s.poses, 0.0);  // identity poses: ego frame == global frame
  s.future = Array<double>({agents, t_f, 2});
  fill(s.future, 4.0);
  s.scene_id = 0;
  return s;
}

// Finite-difference check of d(loss)/d(theta) for every parameter of a
// model against tape gradients. `loss_fn` must rebuild the whole forward
// graph from the store each call.
template <typename T>
struct ModelGradCheck {
  double worst_rel = 0;
  std::string worst_param;
  bool ok(double tol) const { return worst_rel <= tol; }
};

template <typename T, typename LossFn>
ModelGradCheck<T> model_gradcheck(Model<T>& model, const LossFn& loss_fn,
                                  double step = 1e-5) {
  // Analytic gradients once.
  Tape<T> tape;
  ParamBinding<T> binding = bind_params(tape, model.params());
  Var<T> loss = loss_fn(tape, binding);
  tape.backward(loss);

  ModelGradCheck<T> res;
  for (const auto& [name, value] : model.params()) {
    const Array<T>& g = tape.grad(binding.at(name));
    Array<T>& p = model.params().mutable_get(name);
    for (int64_t i = 0; i < p.size(); ++i) {
      const T saved = p[i];
      p[i] = saved + static_cast<T>(step);
      Tape<T> tp;
      ParamBinding<T> bp = bind_params(tp, model.params());
      const double fp = static_cast<double>(loss_fn(tp, bp).value()[0]);
      p[i] = saved - static_cast<T>(step);
      Tape<T> tm;
      ParamBinding<T> bm = bind_params(tm, model.params());
      const double fm = static_cast<double>(loss_fn(tm, bm).value()[0]);
      p[i] = saved;
      const double fd = (fp - fm) / (2.0 * step);
      const double an = static_cast<double>(g[i]);
      const double rel =
          std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      if (rel > res.worst_rel) {
        res.worst_rel = rel;
        res.worst_param = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

}  // namespace trajcast::testing

#endif  // TRAJCAST_TESTS_TEST_UTIL_HPP_
