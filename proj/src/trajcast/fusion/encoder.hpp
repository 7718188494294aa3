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

#ifndef TRAJCAST_FUSION_ENCODER_HPP_
#define TRAJCAST_FUSION_ENCODER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "trajcast/attention/blocks.hpp"
#include "trajcast/scene/tokens.hpp"

namespace trajcast {

enum class FusionKind { kLate, kEarly, kHierarchical };
enum class AttnRegime { kMultiAxis, kFactorizedSequential,
                        kFactorizedInterleaved };

const char* fusion_name(FusionKind f);
const char* regime_name(AttnRegime r);
FusionKind fusion_from_name(const std::string& s);
AttnRegime regime_from_name(const std::string& s);

// Scene encoder configuration.
//
// Latent queries are applied in the first block of every entry encoder
// (each modality encoder in late/hierarchical fusion, the single
// cross-modal encoder in early fusion) and reduce sequence length by the
// shared ratio R; later stages run at the reduced resolution. In
// factorized regimes the first temporal / first spatial block of the
// encoder is replaced by a latent block with the per-axis counts; a
// modality whose time axis is 1 keeps it and is tiled to the common
// temporal length at the cross-modal boundary instead.
struct EncoderConfig {
  FusionKind fusion = FusionKind::kEarly;
  AttnRegime regime = AttnRegime::kMultiAxis;
  int64_t depth = 2;  // N
  BlockConfig block;
  std::optional<double> latent_ratio;   // R
  std::optional<int64_t> latent_time;   // factorized per-axis counts
  std::optional<int64_t> latent_space;

  bool factorized() const { return regime != AttnRegime::kMultiAxis; }
  void validate() const;
};

// Per-scene modality extents; the four modalities are ordered (history,
// interactions, roadgraph, traffic_lights) throughout.
struct SceneDims {
  int64_t t_history = 0;
  int64_t s_interactions = 0;
  int64_t s_roadgraph = 0;
  int64_t s_lights = 0;

  // (T_m, S_m) per modality.
  std::pair<int64_t, int64_t> modality_dims(ModalityId m) const;
};

inline constexpr ModalityId kAllModalities[] = {
    ModalityId::kHistory, ModalityId::kInteractions, ModalityId::kRoadgraph,
    ModalityId::kTrafficLights};

// One attention block as planned: parameter prefix, kind, axis, and the
// per-agent score-count geometry (groups times lq times lk).
struct PlannedBlock {
  std::string prefix;
  enum Kind { kSelf, kLatent } kind = kSelf;
  AttnAxis axis = AttnAxis::kJoint;
  int64_t groups = 1;  // independent slices per agent
  int64_t lq = 0, lk = 0;
  int64_t latent_len = 0;  // kLatent only

  int64_t scores() const { return groups * lq * lk; }
};

struct StackPlan {
  std::string prefix;
  ModalityId modality = ModalityId::kHistory;  // stage-1 stacks only
  std::vector<PlannedBlock> blocks;
  // Geometry entering/leaving the stack. Multi-axis stacks use (1, L).
  int64_t t_in = 1, s_in = 0, t_out = 1, s_out = 0;
};

// The full encoder as a block plan. This is the closed-form source for
// both the encoded length L_z and the attention score counts that the
// instrumented forward must match exactly.
struct EncoderPlan {
  std::vector<StackPlan> modality_stacks;  // late & hierarchical stage 1
  std::optional<StackPlan> cross_stack;    // early & hierarchical stage 2
  int64_t encoded_length = 0;              // L_z per agent
  bool pool_time = false;                  // factorized regimes pool over T

  int64_t total_scores_per_agent() const;
};

// `active` selects which modalities the encoder ingests (all four by
// default; subsets exercise degenerate fusion equivalences).
EncoderPlan plan_encoder(const EncoderConfig& cfg, const SceneDims& dims,
                         const std::vector<ModalityId>& active = {
                             ModalityId::kHistory, ModalityId::kInteractions,
                             ModalityId::kRoadgraph,
                             ModalityId::kTrafficLights});

// Registers every block parameter the plan needs.
template <typename T>
void register_encoder(ParamStore<T>& ps, const EncoderConfig& cfg,
                      const EncoderPlan& plan, Rng& rng);

template <typename T>
struct SceneEncoding {
  Var<T> z;   // [A, L_z, D]
  Mask mask;  // [A, L_z]
};

// Runs the planned encoder over projected, position-embedded modalities
// (ordered as kAllModalities). Dispatches on cfg.fusion.
template <typename T>
SceneEncoding<T> encode_scene(AttnCtx<T>& ctx, const EncoderConfig& cfg,
                              const EncoderPlan& plan,
                              const std::vector<ProjectedModality<T>>& mods);

// Mask-aware mean over the time axis of a factorized encoding:
// [A, T, S, D] -> [A, S, D]. Slots with no valid timestep come out zero
// and invalid.
template <typename T>
SceneEncoding<T> finalize_factorized(Tape<T>& tape, Var<T> enc,
                                     const Mask& mask);

}  // namespace trajcast

#endif  // TRAJCAST_FUSION_ENCODER_HPP_
