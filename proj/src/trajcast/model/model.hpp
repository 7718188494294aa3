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

#ifndef TRAJCAST_MODEL_MODEL_HPP_
#define TRAJCAST_MODEL_MODEL_HPP_

#include <string>
#include <vector>

#include "trajcast/decoder/decoder.hpp"
#include "trajcast/fusion/encoder.hpp"
#include "trajcast/scene/scene_types.hpp"
#include "trajcast/scene/tokens.hpp"

namespace trajcast {

// Complete model description: scene extents, encoder, and the decoder
// head(s). One shared encoder can feed several decoders whose merged
// mixtures form an ensemble.
struct ModelConfig {
  SceneDims dims;
  EncoderConfig encoder;
  int64_t decoder_depth = 1;
  int64_t decoder_hidden = 0;        // 0: encoder width
  int64_t decoder_intermediate = 0;  // 0: 2x decoder width
  int64_t decoder_heads = 0;         // 0: encoder heads
  int64_t modes = 6;
  int64_t future_steps = 8;
  int64_t ensemble_decoders = 1;
  double logstd_clamp = 5.0;

  DecoderConfig decoder_config() const;
  void validate() const;
};

// Per-forward instrumentation.
template <typename T>
struct ForwardOptions {
  ScoreCounter* counter = nullptr;
  Rng* dropout_rng = nullptr;
};

template <typename T>
class Model {
 public:
  explicit Model(ModelConfig cfg);

  // Registers and initializes every parameter. Positional tables and the
  // output heads start at zero; weights are seeded from `seed`.
  void init(uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const EncoderPlan& plan() const { return plan_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  int64_t parameter_count() const { return params_.total_parameters(); }

  // Builds the forward graph for one scene: embeds modalities, encodes,
  // and decodes one mixture per decoder head.
  std::vector<MixtureOut<T>> forward(Tape<T>& tape,
                                     const ParamBinding<T>& binding,
                                     const SceneTensors& scene,
                                     const ForwardOptions<T>& opts = {}) const;

  // Encoder output only (used by isolation and invariance tests).
  SceneEncoding<T> encode(Tape<T>& tape, const ParamBinding<T>& binding,
                          const SceneTensors& scene,
                          const ForwardOptions<T>& opts = {}) const;

  // Closed-form attention-score count per agent (encoder + decoders).
  int64_t planned_scores_per_agent() const;

 private:
  void check_scene(const SceneTensors& scene) const;
  std::vector<ProjectedModality<T>> embed(Tape<T>& tape,
                                          const ParamBinding<T>& binding,
                                          const SceneTensors& scene,
                                          AttnCtx<T>& ctx) const;

  ModelConfig cfg_;
  EncoderPlan plan_;
  ParamStore<T> params_;
};

}  // namespace trajcast

#endif  // TRAJCAST_MODEL_MODEL_HPP_
