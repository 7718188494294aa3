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

#ifndef TRAJCAST_ATTENTION_BLOCKS_HPP_
#define TRAJCAST_ATTENTION_BLOCKS_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "trajcast/core/ops.hpp"
#include "trajcast/model/params.hpp"

namespace trajcast {

enum class AttnAxis { kJoint, kTemporal, kSpatial };

struct BlockConfig {
  int64_t hidden = 64;
  int64_t heads = 2;
  int64_t intermediate = 128;
  double dropout = 0.0;
  AttnAxis axis = AttnAxis::kJoint;
  std::optional<int64_t> latent_out;

  void validate() const;
};

// Latent length from a reduction ratio: round half away from zero with a
// floor of 1, so configs are totally ordered in R.
int64_t latent_length(double ratio, int64_t l_in);

// Counts attention score elements: one per (query, key) pair per axis
// slice, head-agnostic. A joint layer over L tokens adds A*L*L; a temporal
// factorized layer adds A*S*T*T.
struct ScoreCounter {
  int64_t scores = 0;
};

template <typename T>
struct AttnCtx {
  Tape<T>* tape = nullptr;
  const ParamBinding<T>* params = nullptr;
  ScoreCounter* counter = nullptr;
  Rng* dropout_rng = nullptr;  // dropout disabled when null
};

// Parameter registration. Names live under `prefix` and are looked up by
// the matching block functions.
template <typename T>
void register_self_attention_block(ParamStore<T>& ps,
                                   const std::string& prefix,
                                   const BlockConfig& cfg, Rng& rng);
template <typename T>
void register_latent_query_block(ParamStore<T>& ps, const std::string& prefix,
                                 const BlockConfig& cfg, int64_t latent_len,
                                 Rng& rng);
template <typename T>
void register_decoder_block(ParamStore<T>& ps, const std::string& prefix,
                            const BlockConfig& cfg, Rng& rng);

// Pre-layernorm residual self-attention block over x: [A, L, D] with token
// mask [A, L]. Masked keys are excluded from attention; masked query rows
// pass through unchanged. An agent with no valid token raises NumericError.
template <typename T>
Var<T> self_attention_block(AttnCtx<T>& ctx, const std::string& prefix,
                            Var<T> x, const Mask& mask,
                            const BlockConfig& cfg);

// Axis-restricted block over x: [A, T, S, D] with mask [A, T, S].
// axis=kTemporal attends along T independently per s; axis=kSpatial along
// S per t. Fully masked slices pass through; an agent with no valid cell
// raises.
template <typename T>
Var<T> factorized_block(AttnCtx<T>& ctx, const std::string& prefix, Var<T> x,
                        const Mask& mask, AttnAxis axis,
                        const BlockConfig& cfg);

// Latent-query cross-attention block: trainable queries (prefix + "/latent",
// [L_out, D]) attend to x [A, L_in, D]; output [A, L_out, D] with mask
// out_mask (valid wherever the agent has at least one valid input token).
template <typename T>
Var<T> latent_query_block(AttnCtx<T>& ctx, const std::string& prefix,
                          Var<T> x, const Mask& mask, const BlockConfig& cfg,
                          Mask* out_mask);

// Latent-query block along one axis of x: [A, T, S, D]; the chosen axis
// length is replaced by latent_len, the other axis is preserved.
template <typename T>
Var<T> factorized_latent_query_block(AttnCtx<T>& ctx,
                                     const std::string& prefix, Var<T> x,
                                     const Mask& mask, AttnAxis axis,
                                     int64_t latent_len,
                                     const BlockConfig& cfg, Mask* out_mask);

// Decoder block: self-attention over the k mode queries, cross-attention
// to the scene encoding z (masked), then the feedforward, all pre-LN
// residual. q: [A, k, D], z: [A, Lz, D].
template <typename T>
Var<T> decoder_block(AttnCtx<T>& ctx, const std::string& prefix, Var<T> q,
                     Var<T> z, const Mask& z_mask, const BlockConfig& cfg);

}  // namespace trajcast

#endif  // TRAJCAST_ATTENTION_BLOCKS_HPP_
