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

#ifndef TRAJCAST_DECODER_DECODER_HPP_
#define TRAJCAST_DECODER_DECODER_HPP_

#include <string>
#include <vector>

#include "trajcast/fusion/encoder.hpp"

namespace trajcast {

struct DecoderConfig {
  int64_t depth = 1;
  int64_t modes = 6;         // k learned queries / mixture components
  int64_t future_steps = 8;  // T_f
  BlockConfig block;         // block.hidden is the decoder width
  int64_t encoder_width = 64;
  double logstd_clamp = 5.0;

  void validate() const;
};

// The decoder's Gaussian-mixture output, one candidate trajectory per
// learned query: mixture logits plus per-timestep means and
// log-standard-deviations (clamped to +-logstd_clamp).
template <typename T>
struct MixtureOut {
  Var<T> logits;  // [A, k]
  Var<T> means;   // [A, k, T_f, 2]
  Var<T> logstd;  // [A, k, T_f, 2]
};

template <typename T>
void register_decoder(ParamStore<T>& ps, const DecoderConfig& cfg, Rng& rng,
                      const std::string& prefix = "dec");

// Cross-attention decoding: the k mode queries self-attend, cross-attend
// to the scene encoding, and two affine heads produce the mixture logit
// and the 4*T_f trajectory series per mode. Heads are zero-initialized, so
// a fresh model outputs a uniform mixture with zero trajectories.
template <typename T>
MixtureOut<T> decode(AttnCtx<T>& ctx, const DecoderConfig& cfg,
                     const SceneEncoding<T>& enc,
                     const std::string& prefix = "dec");

// Log-probability of the ground truth under one selected mode per agent:
// sum over timesteps of a diagonal 2-D Gaussian log-density. Returns [A].
template <typename T>
Var<T> mixture_log_prob(const MixtureOut<T>& mix, const Array<T>& gt,
                        const std::vector<int64_t>& mode_per_agent);

// Attention score elements the decoder contributes per agent, matching
// the instrumented counter.
int64_t decoder_scores_per_agent(const DecoderConfig& cfg, int64_t l_z);

}  // namespace trajcast

#endif  // TRAJCAST_DECODER_DECODER_HPP_
