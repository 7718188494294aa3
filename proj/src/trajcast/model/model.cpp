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

#include "trajcast/model/model.hpp"

namespace trajcast {

DecoderConfig ModelConfig::decoder_config() const {
  DecoderConfig d;
  d.depth = decoder_depth;
  d.modes = modes;
  d.future_steps = future_steps;
  d.block = encoder.block;
  d.block.hidden = decoder_hidden > 0 ? decoder_hidden : encoder.block.hidden;
  d.block.intermediate = decoder_intermediate > 0 ? decoder_intermediate
                                                  : 2 * d.block.hidden;
  d.block.heads = decoder_heads > 0 ? decoder_heads : encoder.block.heads;
  d.encoder_width = encoder.block.hidden;
  d.logstd_clamp = logstd_clamp;
  return d;
}

void ModelConfig::validate() const {
  encoder.validate();
  decoder_config().validate();
  if (future_steps < 1) throw UsageError("future_steps must be >= 1");
  if (ensemble_decoders < 1) {
    throw UsageError("ensemble_decoders must be >= 1");
  }
  if (dims.t_history < 2) {
    throw UsageError("history must cover at least 2 timesteps");
  }
  if (dims.s_interactions < 1 || dims.s_roadgraph < 1 || dims.s_lights < 1) {
    throw UsageError("modality slot caps must be >= 1");
  }
}

template <typename T>
Model<T>::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  plan_ = plan_encoder(cfg_.encoder, cfg_.dims);
}

template <typename T>
void Model<T>::init(uint64_t seed) {
  if (params_.count() > 0) throw Error("model already initialized");
  Rng rng(seed);
  const int64_t d = cfg_.encoder.block.hidden;
  for (ModalityId m : kAllModalities) {
    const std::string name = modality_name(m);
    init_xavier(
        params_.create("proj/" + name + "/w", {d, modality_feature_dim(m)}),
        rng);
    params_.create("proj/" + name + "/b", {d});
    auto [t_m, s_m] = cfg_.dims.modality_dims(m);
    // Learned positional embeddings, one row per (t, s) cell, start at
    // zero so ordering is only used if training finds it useful.
    params_.create("pos/" + name, {t_m * s_m, d});
  }
  register_encoder(params_, cfg_.encoder, plan_, rng);
  const DecoderConfig dec = cfg_.decoder_config();
  for (int64_t n = 0; n < cfg_.ensemble_decoders; ++n) {
    register_decoder(params_, dec, rng, "dec" + std::to_string(n));
  }
}

template <typename T>
void Model<T>::check_scene(const SceneTensors& scene) const {
  const auto& d = cfg_.dims;
  auto expect = [&](const ModalityTensor& m, ModalityId id) {
    auto [t, s] = d.modality_dims(id);
    const Shape want{scene.agents(), t, s, modality_feature_dim(id)};
    if (m.values.shape() != want) {
      throw DataError(std::string("scene modality ") + modality_name(id) +
                      " has shape " + shape_str(m.values.shape()) +
                      ", model expects " + shape_str(want));
    }
  };
  expect(scene.history, ModalityId::kHistory);
  expect(scene.interactions, ModalityId::kInteractions);
  expect(scene.roadgraph, ModalityId::kRoadgraph);
  expect(scene.traffic_lights, ModalityId::kTrafficLights);
  if (scene.future_steps() < cfg_.future_steps) {
    throw DataError("scene future shorter than the model horizon");
  }
}

template <typename T>
std::vector<ProjectedModality<T>> Model<T>::embed(
    Tape<T>& tape, const ParamBinding<T>& binding, const SceneTensors& scene,
    AttnCtx<T>& ctx) const {
  (void)ctx;
  std::vector<ProjectedModality<T>> mods;
  for (ModalityId m : kAllModalities) {
    const ModalityTensor& mt = scene.modality(m);
    const std::string name = modality_name(m);
    auto values = tape.constant(cast_array<T>(mt.values));
    auto projected = project(values, binding.at("proj/" + name + "/w"),
                             binding.at("proj/" + name + "/b"), mt.mask);
    auto embedded = add_positional(projected, binding.at("pos/" + name));
    mods.push_back(ProjectedModality<T>{embedded, mt.mask, m});
  }
  return mods;
}

template <typename T>
SceneEncoding<T> Model<T>::encode(Tape<T>& tape,
                                  const ParamBinding<T>& binding,
                                  const SceneTensors& scene,
                                  const ForwardOptions<T>& opts) const {
  check_scene(scene);
  AttnCtx<T> ctx{&tape, &binding, opts.counter, opts.dropout_rng};
  auto mods = embed(tape, binding, scene, ctx);
  return encode_scene(ctx, cfg_.encoder, plan_, mods);
}

template <typename T>
std::vector<MixtureOut<T>> Model<T>::forward(
    Tape<T>& tape, const ParamBinding<T>& binding, const SceneTensors& scene,
    const ForwardOptions<T>& opts) const {
  SceneEncoding<T> enc = encode(tape, binding, scene, opts);
  AttnCtx<T> ctx{&tape, &binding, opts.counter, opts.dropout_rng};
  const DecoderConfig dec = cfg_.decoder_config();
  std::vector<MixtureOut<T>> outs;
  outs.reserve(static_cast<size_t>(cfg_.ensemble_decoders));
  for (int64_t n = 0; n < cfg_.ensemble_decoders; ++n) {
    outs.push_back(decode(ctx, dec, enc, "dec" + std::to_string(n)));
  }
  return outs;
}

template <typename T>
int64_t Model<T>::planned_scores_per_agent() const {
  return plan_.total_scores_per_agent() +
         cfg_.ensemble_decoders *
             decoder_scores_per_agent(cfg_.decoder_config(),
                                      plan_.encoded_length);
}

template class Model<float>;
template class Model<double>;

}  // namespace trajcast
