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

#include "trajcast/fusion/encoder.hpp"

#include <algorithm>
#include <utility>

namespace trajcast {

const char* fusion_name(FusionKind f) {
  switch (f) {
    case FusionKind::kLate: return "late";
    case FusionKind::kEarly: return "early";
    case FusionKind::kHierarchical: return "hierarchical";
  }
  return "?";
}

const char* regime_name(AttnRegime r) {
  switch (r) {
    case AttnRegime::kMultiAxis: return "multi_axis";
    case AttnRegime::kFactorizedSequential: return "factorized_sequential";
    case AttnRegime::kFactorizedInterleaved: return "factorized_interleaved";
  }
  return "?";
}

FusionKind fusion_from_name(const std::string& s) {
  if (s == "late") return FusionKind::kLate;
  if (s == "early") return FusionKind::kEarly;
  if (s == "hierarchical") return FusionKind::kHierarchical;
  throw UsageError("unknown fusion '" + s +
                   "' (expected late|early|hierarchical)");
}

AttnRegime regime_from_name(const std::string& s) {
  if (s == "multi_axis") return AttnRegime::kMultiAxis;
  if (s == "factorized_sequential") return AttnRegime::kFactorizedSequential;
  if (s == "factorized_interleaved") return AttnRegime::kFactorizedInterleaved;
  throw UsageError("unknown attention regime '" + s + "'");
}

void EncoderConfig::validate() const {
  block.validate();
  if (depth < 0) throw UsageError("encoder depth must be >= 0");
  if (factorized() && depth % 2 != 0) {
    throw UsageError("factorized regimes need an even depth (N/2 temporal + "
                     "N/2 spatial blocks)");
  }
  if (fusion == FusionKind::kHierarchical && depth < 2) {
    throw UsageError("hierarchical fusion needs depth >= 2");
  }
  if (!factorized() && (latent_time || latent_space)) {
    throw UsageError("per-axis latent counts require a factorized regime");
  }
  if (latent_ratio && (*latent_ratio <= 0.0 || *latent_ratio > 4.0)) {
    throw UsageError("latent ratio must be in (0, 4]");
  }
  if ((latent_time && *latent_time < 1) ||
      (latent_space && *latent_space < 1)) {
    throw UsageError("per-axis latent counts must be >= 1");
  }
}

std::pair<int64_t, int64_t> SceneDims::modality_dims(ModalityId m) const {
  switch (m) {
    case ModalityId::kHistory: return {t_history, 1};
    case ModalityId::kInteractions: return {t_history, s_interactions};
    case ModalityId::kRoadgraph: return {1, s_roadgraph};
    case ModalityId::kTrafficLights: return {t_history, s_lights};
  }
  return {0, 0};
}

int64_t EncoderPlan::total_scores_per_agent() const {
  int64_t total = 0;
  for (const auto& sp : modality_stacks)
    for (const auto& b : sp.blocks) total += b.scores();
  if (cross_stack)
    for (const auto& b : cross_stack->blocks) total += b.scores();
  return total;
}

namespace {

std::vector<AttnAxis> stack_order(AttnRegime regime, int64_t n) {
  std::vector<AttnAxis> order;
  order.reserve(static_cast<size_t>(n));
  if (regime == AttnRegime::kFactorizedSequential) {
    for (int64_t i = 0; i < n / 2; ++i) order.push_back(AttnAxis::kTemporal);
    for (int64_t i = 0; i < n / 2; ++i) order.push_back(AttnAxis::kSpatial);
  } else {
    for (int64_t i = 0; i < n / 2; ++i) {
      order.push_back(AttnAxis::kTemporal);
      order.push_back(AttnAxis::kSpatial);
    }
  }
  return order;
}

StackPlan plan_multiaxis_stack(const std::string& prefix, int64_t depth,
                               int64_t l_in,
                               const std::optional<double>& ratio) {
  StackPlan sp;
  sp.prefix = prefix;
  sp.t_in = 1;
  sp.s_in = l_in;
  int64_t l = l_in;
  for (int64_t i = 0; i < depth; ++i) {
    const std::string bp = prefix + "/b" + std::to_string(i);
    if (i == 0 && ratio) {
      const int64_t lo = latent_length(*ratio, l_in);
      sp.blocks.push_back({bp, PlannedBlock::kLatent, AttnAxis::kJoint, 1,
                           lo, l_in, lo});
      l = lo;
    } else {
      sp.blocks.push_back({bp, PlannedBlock::kSelf, AttnAxis::kJoint, 1, l,
                           l, 0});
    }
  }
  sp.t_out = 1;
  sp.s_out = l;
  return sp;
}

// Latent counts for one factorized stack, honoring explicit per-axis
// counts first and otherwise deriving them from the shared ratio.
struct AxisLatents {
  std::optional<int64_t> time, space;
};

AxisLatents resolve_axis_latents(const EncoderConfig& cfg, int64_t t_in,
                                 int64_t s_in) {
  AxisLatents out;
  if (cfg.latent_time) out.time = *cfg.latent_time;
  else if (cfg.latent_ratio) out.time = latent_length(*cfg.latent_ratio, t_in);
  if (cfg.latent_space) out.space = *cfg.latent_space;
  else if (cfg.latent_ratio)
    out.space = latent_length(*cfg.latent_ratio, s_in);
  return out;
}

StackPlan plan_factorized_stack(const std::string& prefix,
                                const std::vector<AttnAxis>& order,
                                int64_t block_index_base, int64_t t_in,
                                int64_t s_in, const AxisLatents& latents,
                                bool allow_time_latent,
                                bool allow_space_latent) {
  StackPlan sp;
  sp.prefix = prefix;
  sp.t_in = t_in;
  sp.s_in = s_in;
  int64_t t = t_in, s = s_in;
  bool first_t = allow_time_latent, first_s = allow_space_latent;
  for (size_t i = 0; i < order.size(); ++i) {
    const std::string bp =
        prefix + "/b" + std::to_string(block_index_base + static_cast<int64_t>(i));
    if (order[i] == AttnAxis::kTemporal) {
      // Modalities without a real time axis keep T = 1 and are tiled at
      // the cross-modal boundary instead of getting a temporal latent.
      if (first_t && latents.time && t_in > 1) {
        sp.blocks.push_back({bp, PlannedBlock::kLatent, AttnAxis::kTemporal,
                             s, *latents.time, t, *latents.time});
        t = *latents.time;
      } else {
        sp.blocks.push_back({bp, PlannedBlock::kSelf, AttnAxis::kTemporal, s,
                             t, t, 0});
      }
      first_t = false;
    } else {
      if (first_s && latents.space) {
        sp.blocks.push_back({bp, PlannedBlock::kLatent, AttnAxis::kSpatial,
                             t, *latents.space, s, *latents.space});
        s = *latents.space;
      } else {
        sp.blocks.push_back({bp, PlannedBlock::kSelf, AttnAxis::kSpatial, t,
                             s, s, 0});
      }
      first_s = false;
    }
  }
  sp.t_out = t;
  sp.s_out = s;
  return sp;
}

std::string modality_prefix(ModalityId m) {
  return std::string("enc/") + modality_name(m);
}

}  // namespace

EncoderPlan plan_encoder(const EncoderConfig& cfg, const SceneDims& dims,
                         const std::vector<ModalityId>& active) {
  cfg.validate();
  if (dims.t_history < 1 || dims.s_interactions < 1 ||
      dims.s_roadgraph < 1 || dims.s_lights < 1) {
    throw UsageError("encoder plan: all modality extents must be >= 1");
  }
  if (active.empty()) throw UsageError("encoder plan: no modalities");
  EncoderPlan plan;
  plan.pool_time = cfg.factorized();

  if (cfg.fusion == FusionKind::kEarly) {
    if (!cfg.factorized()) {
      int64_t l_total = 0;
      for (ModalityId m : active) {
        auto [t, s] = dims.modality_dims(m);
        l_total += t * s;
      }
      plan.cross_stack =
          plan_multiaxis_stack("enc/cross", cfg.depth, l_total,
                               cfg.latent_ratio);
      plan.encoded_length = plan.cross_stack->s_out;
    } else {
      int64_t t_common = 1;
      for (ModalityId m : active)
        t_common = std::max(t_common, dims.modality_dims(m).first);
      int64_t s_total = 0;
      for (ModalityId m : active)
        s_total += dims.modality_dims(m).second;
      plan.cross_stack = plan_factorized_stack(
          "enc/cross", stack_order(cfg.regime, cfg.depth), 0, t_common,
          s_total, resolve_axis_latents(cfg, t_common, s_total), true, true);
      plan.encoded_length = plan.cross_stack->s_out;
    }
    return plan;
  }

  if (cfg.fusion == FusionKind::kLate) {
    int64_t l_z = 0;
    for (ModalityId m : active) {
      auto [t, s] = dims.modality_dims(m);
      StackPlan sp;
      if (!cfg.factorized()) {
        sp = plan_multiaxis_stack(modality_prefix(m), cfg.depth, t * s,
                                  cfg.latent_ratio);
        l_z += sp.s_out;
      } else {
        sp = plan_factorized_stack(modality_prefix(m),
                                   stack_order(cfg.regime, cfg.depth), 0, t,
                                   s, resolve_axis_latents(cfg, t, s), true,
                                   true);
        l_z += sp.s_out;
      }
      sp.modality = m;
      plan.modality_stacks.push_back(std::move(sp));
    }
    plan.encoded_length = l_z;
    return plan;
  }

  // Hierarchical: stage 1 gets floor(N/2) blocks per modality, the
  // cross-modal stage the remaining ceil(N/2); the cross-modal stage is
  // the quality driver so it keeps the larger half.
  const int64_t h1 = cfg.depth / 2;
  if (!cfg.factorized()) {
    int64_t l_concat = 0;
    for (ModalityId m : active) {
      auto [t, s] = dims.modality_dims(m);
      StackPlan sp = plan_multiaxis_stack(modality_prefix(m), h1, t * s,
                                          cfg.latent_ratio);
      sp.modality = m;
      l_concat += sp.s_out;
      plan.modality_stacks.push_back(std::move(sp));
    }
    plan.cross_stack = plan_multiaxis_stack("enc/cross", cfg.depth - h1,
                                            l_concat, std::nullopt);
    plan.encoded_length = plan.cross_stack->s_out;
    return plan;
  }

  const std::vector<AttnAxis> order = stack_order(cfg.regime, cfg.depth);
  const std::vector<AttnAxis> order1(order.begin(), order.begin() + h1);
  const std::vector<AttnAxis> order2(order.begin() + h1, order.end());
  const bool stage1_has_t =
      std::count(order1.begin(), order1.end(), AttnAxis::kTemporal) > 0;
  const bool stage1_has_s =
      std::count(order1.begin(), order1.end(), AttnAxis::kSpatial) > 0;

  int64_t t2 = 1, s2 = 0;
  for (ModalityId m : active) {
    auto [t, s] = dims.modality_dims(m);
    StackPlan sp = plan_factorized_stack(
        modality_prefix(m), order1, 0, t, s, resolve_axis_latents(cfg, t, s),
        true, true);
    sp.modality = m;
    t2 = std::max(t2, sp.t_out);
    s2 += sp.s_out;
    plan.modality_stacks.push_back(std::move(sp));
  }
  plan.cross_stack = plan_factorized_stack(
      "enc/cross", order2, h1, t2, s2, resolve_axis_latents(cfg, t2, s2),
      !stage1_has_t, !stage1_has_s);
  plan.encoded_length = plan.cross_stack->s_out;
  return plan;
}

template <typename T>
void register_encoder(ParamStore<T>& ps, const EncoderConfig& cfg,
                      const EncoderPlan& plan, Rng& rng) {
  auto register_stack = [&](const StackPlan& sp) {
    for (const auto& b : sp.blocks) {
      if (b.kind == PlannedBlock::kSelf) {
        register_self_attention_block(ps, b.prefix, cfg.block, rng);
      } else {
        register_latent_query_block(ps, b.prefix, cfg.block, b.latent_len,
                                    rng);
      }
    }
  };
  for (const auto& sp : plan.modality_stacks) register_stack(sp);
  if (plan.cross_stack) register_stack(*plan.cross_stack);
}

namespace {

template <typename T>
TokenSequence<T> run_multiaxis_stack(AttnCtx<T>& ctx, const BlockConfig& bc,
                                     const StackPlan& sp,
                                     TokenSequence<T> seq) {
  for (const auto& b : sp.blocks) {
    if (b.kind == PlannedBlock::kSelf) {
      seq.tokens = self_attention_block(ctx, b.prefix, seq.tokens, seq.mask,
                                        bc);
    } else {
      Mask out_mask;
      seq.tokens = latent_query_block(ctx, b.prefix, seq.tokens, seq.mask,
                                      bc, &out_mask);
      seq.mask = std::move(out_mask);
      seq.provenance.clear();
    }
  }
  return seq;
}

template <typename T>
TokenGrid<T> run_factorized_stack(AttnCtx<T>& ctx, const BlockConfig& bc,
                                  const StackPlan& sp, TokenGrid<T> grid) {
  for (const auto& b : sp.blocks) {
    if (b.kind == PlannedBlock::kSelf) {
      grid.values = factorized_block(ctx, b.prefix, grid.values, grid.mask,
                                     b.axis, bc);
    } else {
      Mask out_mask;
      grid.values = factorized_latent_query_block(
          ctx, b.prefix, grid.values, grid.mask, b.axis, b.latent_len, bc,
          &out_mask);
      grid.mask = std::move(out_mask);
      grid.provenance.clear();
    }
  }
  return grid;
}

template <typename T>
TokenGrid<T> grid_of(const ProjectedModality<T>& pm) {
  std::vector<ProjectedModality<T>> one{pm};
  return concat_grid(one);
}

template <typename T>
SceneEncoding<T> concat_encodings(Tape<T>&, std::vector<Var<T>> parts,
                                  const std::vector<Mask>& masks) {
  SceneEncoding<T> out;
  out.z = concat(parts, 1);
  const int64_t a = out.z.value().dim(0);
  const int64_t l = out.z.value().dim(1);
  out.mask = Mask({a, l});
  int64_t off = 0;
  for (const auto& m : masks) {
    const int64_t w = m.dim(1);
    for (int64_t ai = 0; ai < a; ++ai)
      std::copy(m.ptr() + ai * w, m.ptr() + (ai + 1) * w,
                out.mask.ptr() + ai * l + off);
    off += w;
  }
  return out;
}

}  // namespace

template <typename T>
SceneEncoding<T> finalize_factorized(Tape<T>&, Var<T> enc, const Mask& mask) {
  SceneEncoding<T> out;
  out.z = masked_mean_axis1(enc, mask);
  const int64_t a = mask.dim(0), t = mask.dim(1), s = mask.dim(2);
  out.mask = Mask({a, s});
  for (int64_t ai = 0; ai < a; ++ai)
    for (int64_t si = 0; si < s; ++si) {
      uint8_t any = 0;
      for (int64_t ti = 0; ti < t; ++ti) any |= mask.at(ai, ti, si);
      out.mask.at(ai, si) = any;
    }
  return out;
}

template <typename T>
SceneEncoding<T> encode_scene(AttnCtx<T>& ctx, const EncoderConfig& cfg,
                              const EncoderPlan& plan,
                              const std::vector<ProjectedModality<T>>& mods) {
  if (cfg.fusion != FusionKind::kEarly &&
      mods.size() != plan.modality_stacks.size()) {
    throw ShapeError("encode_scene: modality count does not match the plan");
  }
  if (mods.empty()) throw ShapeError("encode_scene: no modalities");
  Tape<T>& tape = *ctx.tape;

  if (cfg.fusion == FusionKind::kEarly) {
    if (!cfg.factorized()) {
      std::vector<TokenSequence<T>> parts;
      for (const auto& pm : mods) parts.push_back(flatten_tokens(pm));
      TokenSequence<T> seq = concat_sequences(parts);
      seq = run_multiaxis_stack(ctx, cfg.block, *plan.cross_stack,
                                std::move(seq));
      return SceneEncoding<T>{seq.tokens, seq.mask};
    }
    TokenGrid<T> grid = concat_grid(mods);
    grid = run_factorized_stack(ctx, cfg.block, *plan.cross_stack,
                                std::move(grid));
    return finalize_factorized(tape, grid.values, grid.mask);
  }

  if (cfg.fusion == FusionKind::kLate) {
    std::vector<Var<T>> parts;
    std::vector<Mask> masks;
    for (size_t i = 0; i < mods.size(); ++i) {
      const StackPlan& sp = plan.modality_stacks[i];
      if (!cfg.factorized()) {
        TokenSequence<T> seq =
            run_multiaxis_stack(ctx, cfg.block, sp, flatten_tokens(mods[i]));
        parts.push_back(seq.tokens);
        masks.push_back(seq.mask);
      } else {
        TokenGrid<T> grid =
            run_factorized_stack(ctx, cfg.block, sp, grid_of(mods[i]));
        SceneEncoding<T> enc =
            finalize_factorized(tape, grid.values, grid.mask);
        parts.push_back(enc.z);
        masks.push_back(enc.mask);
      }
    }
    return concat_encodings(tape, std::move(parts), masks);
  }

  // Hierarchical.
  if (!cfg.factorized()) {
    std::vector<TokenSequence<T>> stage1;
    for (size_t i = 0; i < mods.size(); ++i) {
      stage1.push_back(run_multiaxis_stack(ctx, cfg.block,
                                           plan.modality_stacks[i],
                                           flatten_tokens(mods[i])));
    }
    TokenSequence<T> seq = concat_sequences(stage1);
    seq = run_multiaxis_stack(ctx, cfg.block, *plan.cross_stack,
                              std::move(seq));
    return SceneEncoding<T>{seq.tokens, seq.mask};
  }

  std::vector<ProjectedModality<T>> stage1;
  for (size_t i = 0; i < mods.size(); ++i) {
    TokenGrid<T> grid = run_factorized_stack(
        ctx, cfg.block, plan.modality_stacks[i], grid_of(mods[i]));
    stage1.push_back(ProjectedModality<T>{grid.values, grid.mask,
                                          mods[i].modality});
  }
  TokenGrid<T> cross = concat_grid(stage1);
  cross = run_factorized_stack(ctx, cfg.block, *plan.cross_stack,
                               std::move(cross));
  return finalize_factorized(tape, cross.values, cross.mask);
}

#define TRAJCAST_INSTANTIATE_ENCODER(T)                                      \
  template void register_encoder<T>(ParamStore<T>&, const EncoderConfig&,    \
                                    const EncoderPlan&, Rng&);               \
  template SceneEncoding<T> encode_scene<T>(                                 \
      AttnCtx<T>&, const EncoderConfig&, const EncoderPlan&,                 \
      const std::vector<ProjectedModality<T>>&);                             \
  template SceneEncoding<T> finalize_factorized<T>(Tape<T>&, Var<T>,         \
                                                   const Mask&);

TRAJCAST_INSTANTIATE_ENCODER(float)
TRAJCAST_INSTANTIATE_ENCODER(double)

#undef TRAJCAST_INSTANTIATE_ENCODER

}  // namespace trajcast
