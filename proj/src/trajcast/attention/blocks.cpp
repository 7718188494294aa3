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

#include "trajcast/attention/blocks.hpp"

#include <cmath>
#include <vector>

namespace trajcast {

void BlockConfig::validate() const {
  if (hidden <= 0 || heads <= 0 || hidden % heads != 0) {
    throw UsageError("block config: hidden (" + std::to_string(hidden) +
                     ") must be positive and divisible by heads (" +
                     std::to_string(heads) + ")");
  }
  if (intermediate != 2 * hidden && intermediate != 4 * hidden) {
    throw UsageError("block config: intermediate size must be 2x or 4x the "
                     "hidden size");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw UsageError("block config: dropout must be in [0,1)");
  }
}

int64_t latent_length(double ratio, int64_t l_in) {
  if (ratio <= 0.0) throw UsageError("latent ratio must be positive");
  const auto rounded =
      static_cast<int64_t>(std::llround(ratio * static_cast<double>(l_in)));
  return std::max<int64_t>(1, rounded);
}

namespace {

template <typename T>
Var<T> maybe_dropout(AttnCtx<T>& ctx, Var<T> x, double rate) {
  if (ctx.dropout_rng == nullptr || rate <= 0.0) return x;
  return dropout(x, rate, *ctx.dropout_rng);
}

// x: [G, L, Din] -> [G, L, Dout] through weight [Dout, Din] + bias.
template <typename T>
Var<T> linear3(AttnCtx<T>& ctx, Var<T> x, const std::string& w,
               const std::string& b) {
  const Shape& s = x.value().shape();
  auto flat = reshape(x, {s[0] * s[1], s[2]});
  auto wv = ctx.params->at(w);
  auto out = add_bias(matmul(flat, transpose(wv, {1, 0})), ctx.params->at(b));
  return reshape(out, {s[0], s[1], wv.value().dim(0)});
}

template <typename T>
Var<T> ln3(AttnCtx<T>& ctx, Var<T> x, const std::string& prefix) {
  return layernorm(x, ctx.params->at(prefix + "_g"),
                   ctx.params->at(prefix + "_b"));
}

// [G, L, D] -> [G*H, L, D/H]
template <typename T>
Var<T> split_heads(Var<T> x, int64_t h) {
  const Shape& s = x.value().shape();
  const int64_t dh = s[2] / h;
  auto r = reshape(x, {s[0], s[1], h, dh});
  auto t = transpose(r, {0, 2, 1, 3});
  return reshape(t, {s[0] * h, s[1], dh});
}

template <typename T>
Var<T> merge_heads(Var<T> x, int64_t g, int64_t h) {
  const Shape& s = x.value().shape();
  auto r = reshape(x, {g, h, s[1], s[2]});
  auto t = transpose(r, {0, 2, 1, 3});
  return reshape(t, {g, s[1], h * s[2]});
}

// 0/1 multiplier broadcasting a [G, L] mask over D features.
template <typename T>
Array<T> gate_multiplier(const Mask& mask, int64_t d) {
  Shape s = mask.shape();
  s.push_back(d);
  Array<T> out(s);
  for (int64_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    T* p = out.ptr() + i * d;
    for (int64_t j = 0; j < d; ++j) p[j] = T(1);
  }
  return out;
}

// Multi-head scaled dot-product attention. q: [G, Lq, D], kv: [G, Lk, D],
// key_mask: [G, Lk] or null. Groups whose key set is fully masked fall
// back to an unmasked softmax; their outputs are meaningless and must be
// gated away by the caller.
template <typename T>
Var<T> mha(AttnCtx<T>& ctx, const std::string& prefix, Var<T> q, Var<T> kv,
           const Mask* key_mask, const BlockConfig& cfg) {
  const int64_t g = q.value().dim(0);
  const int64_t lq = q.value().dim(1);
  const int64_t lk = kv.value().dim(1);
  const int64_t h = cfg.heads;
  const int64_t dh = cfg.hidden / h;

  auto qh = split_heads(linear3(ctx, q, prefix + "/wq", prefix + "/bq"), h);
  auto kh = split_heads(linear3(ctx, kv, prefix + "/wk", prefix + "/bk"), h);
  auto vh = split_heads(linear3(ctx, kv, prefix + "/wv", prefix + "/bv"), h);

  auto scores = scale(bmm(qh, transpose(kh, {0, 2, 1})),
                      1.0 / std::sqrt(static_cast<double>(dh)));
  if (ctx.counter) ctx.counter->scores += g * lq * lk;

  Var<T> attn;
  if (key_mask != nullptr) {
    Mask expanded(Shape{g * h, lq, lk});
    for (int64_t gi = 0; gi < g; ++gi) {
      bool any = false;
      for (int64_t j = 0; j < lk; ++j) any = any || key_mask->at(gi, j);
      for (int64_t hi = 0; hi < h; ++hi)
        for (int64_t i = 0; i < lq; ++i)
          for (int64_t j = 0; j < lk; ++j)
            expanded.at(gi * h + hi, i, j) =
                any ? key_mask->at(gi, j) : uint8_t(1);
    }
    attn = softmax_masked(scores, &expanded);
  } else {
    attn = softmax_masked(scores, nullptr);
  }

  auto ctxv = merge_heads(bmm(attn, vh), g, h);
  return linear3(ctx, ctxv, prefix + "/wo", prefix + "/bo");
}

template <typename T>
Var<T> ffn(AttnCtx<T>& ctx, const std::string& prefix, Var<T> x) {
  auto hidden = relu(linear3(ctx, x, prefix + "/ffw1", prefix + "/ffb1"));
  return linear3(ctx, hidden, prefix + "/ffw2", prefix + "/ffb2");
}

// Full pre-LN self-attention block over grouped sequences [G, L, D].
// Masked query rows pass through unchanged because both residual updates
// are gated by the query mask.
template <typename T>
Var<T> self_block_groups(AttnCtx<T>& ctx, const std::string& prefix, Var<T> x,
                         const Mask& gmask, const BlockConfig& cfg) {
  auto h = ln3(ctx, x, prefix + "/ln1");
  auto att = mha(ctx, prefix, h, h, &gmask, cfg);
  Array<T> gate = gate_multiplier<T>(gmask, cfg.hidden);
  auto x1 = add(x, mul_const(maybe_dropout(ctx, att, cfg.dropout), gate));
  auto f = ffn(ctx, prefix, ln3(ctx, x1, prefix + "/ln2"));
  return add(x1, mul_const(maybe_dropout(ctx, f, cfg.dropout),
                           std::move(gate)));
}

// Latent-query cross block over groups; returns [G, L_out, D] and fills
// out_gmask (a group's outputs are valid iff it has any valid key).
template <typename T>
Var<T> latent_block_groups(AttnCtx<T>& ctx, const std::string& prefix,
                           Var<T> x, const Mask& gmask,
                           const BlockConfig& cfg, Mask* out_gmask) {
  const int64_t g = x.value().dim(0);
  auto latent = ctx.params->at(prefix + "/latent");
  const int64_t l_out = latent.value().dim(0);

  Mask group_valid(Shape{g, l_out});
  for (int64_t gi = 0; gi < g; ++gi) {
    bool any = false;
    for (int64_t j = 0; j < gmask.dim(1); ++j) any = any || gmask.at(gi, j);
    for (int64_t i = 0; i < l_out; ++i)
      group_valid.at(gi, i) = any ? 1 : 0;
  }

  auto q0 = broadcast0(latent, g);
  auto hq = ln3(ctx, q0, prefix + "/lnq");
  auto hkv = ln3(ctx, x, prefix + "/lnkv");
  auto att = mha(ctx, prefix, hq, hkv, &gmask, cfg);
  Array<T> gate = gate_multiplier<T>(group_valid, cfg.hidden);
  auto q1 = add(q0, mul_const(maybe_dropout(ctx, att, cfg.dropout), gate));
  auto f = ffn(ctx, prefix, ln3(ctx, q1, prefix + "/ln2"));
  auto out = add(q1, mul_const(maybe_dropout(ctx, f, cfg.dropout), gate));
  // Empty groups carry no information; zero them instead of leaking the
  // raw latent bank downstream.
  Array<T> zero_gate = gate_multiplier<T>(group_valid, cfg.hidden);
  out = mul_const(out, std::move(zero_gate));
  if (out_gmask) *out_gmask = std::move(group_valid);
  return out;
}

template <typename T>
void check_agents_have_tokens(const Mask& mask, int64_t per_agent) {
  const int64_t a = mask.dim(0);
  for (int64_t ai = 0; ai < a; ++ai) {
    bool any = false;
    for (int64_t j = 0; j < per_agent; ++j)
      any = any || mask[ai * per_agent + j];
    if (!any) {
      throw NumericError("attention over agent " + std::to_string(ai) +
                         " with no valid tokens");
    }
  }
}

// [A, T, S] -> grouped masks for one axis.
Mask mask_groups_temporal(const Mask& m) {
  const int64_t a = m.dim(0), t = m.dim(1), s = m.dim(2);
  Mask out(Shape{a * s, t});
  for (int64_t ai = 0; ai < a; ++ai)
    for (int64_t ti = 0; ti < t; ++ti)
      for (int64_t si = 0; si < s; ++si)
        out.at(ai * s + si, ti) = m.at(ai, ti, si);
  return out;
}

Mask mask_groups_spatial(const Mask& m) {
  const int64_t a = m.dim(0), t = m.dim(1), s = m.dim(2);
  Mask out(Shape{a * t, s});
  for (int64_t ai = 0; ai < a; ++ai)
    for (int64_t ti = 0; ti < t; ++ti)
      for (int64_t si = 0; si < s; ++si)
        out.at(ai * t + ti, si) = m.at(ai, ti, si);
  return out;
}

}  // namespace

template <typename T>
Var<T> self_attention_block(AttnCtx<T>& ctx, const std::string& prefix,
                            Var<T> x, const Mask& mask,
                            const BlockConfig& cfg) {
  cfg.validate();
  const Shape& s = x.value().shape();
  if (s.size() != 3 || mask.shape() != Shape({s[0], s[1]})) {
    throw ShapeError("self_attention_block: expects x [A,L,D] with mask "
                     "[A,L]");
  }
  check_agents_have_tokens<T>(mask, s[1]);
  return self_block_groups(ctx, prefix, x, mask, cfg);
}

template <typename T>
Var<T> factorized_block(AttnCtx<T>& ctx, const std::string& prefix, Var<T> x,
                        const Mask& mask, AttnAxis axis,
                        const BlockConfig& cfg) {
  cfg.validate();
  const Shape& s = x.value().shape();
  if (s.size() != 4 || mask.shape() != Shape({s[0], s[1], s[2]})) {
    throw ShapeError("factorized_block: expects x [A,T,S,D] with mask "
                     "[A,T,S]");
  }
  check_agents_have_tokens<T>(mask, s[1] * s[2]);
  if (axis == AttnAxis::kTemporal) {
    auto grouped = reshape(transpose(x, {0, 2, 1, 3}), {s[0] * s[2], s[1], s[3]});
    auto y = self_block_groups(ctx, prefix, grouped,
                               mask_groups_temporal(mask), cfg);
    return transpose(reshape(y, {s[0], s[2], s[1], s[3]}), {0, 2, 1, 3});
  }
  if (axis == AttnAxis::kSpatial) {
    auto grouped = reshape(x, {s[0] * s[1], s[2], s[3]});
    auto y = self_block_groups(ctx, prefix, grouped,
                               mask_groups_spatial(mask), cfg);
    return reshape(y, s);
  }
  throw UsageError("factorized_block: axis must be temporal or spatial");
}

template <typename T>
Var<T> latent_query_block(AttnCtx<T>& ctx, const std::string& prefix,
                          Var<T> x, const Mask& mask, const BlockConfig& cfg,
                          Mask* out_mask) {
  cfg.validate();
  const Shape& s = x.value().shape();
  if (s.size() != 3 || mask.shape() != Shape({s[0], s[1]})) {
    throw ShapeError("latent_query_block: expects x [A,L,D] with mask [A,L]");
  }
  if (s[1] == 0) throw ShapeError("latent_query_block: empty input");
  check_agents_have_tokens<T>(mask, s[1]);
  return latent_block_groups(ctx, prefix, x, mask, cfg, out_mask);
}

template <typename T>
Var<T> factorized_latent_query_block(AttnCtx<T>& ctx,
                                     const std::string& prefix, Var<T> x,
                                     const Mask& mask, AttnAxis axis,
                                     int64_t latent_len,
                                     const BlockConfig& cfg, Mask* out_mask) {
  cfg.validate();
  if (latent_len < 1) {
    throw UsageError("factorized latent block: latent count must be >= 1");
  }
  const Shape& s = x.value().shape();
  if (s.size() != 4 || mask.shape() != Shape({s[0], s[1], s[2]})) {
    throw ShapeError("factorized_latent_query_block: expects x [A,T,S,D] "
                     "with mask [A,T,S]");
  }
  check_agents_have_tokens<T>(mask, s[1] * s[2]);
  if (axis == AttnAxis::kTemporal) {
    auto grouped =
        reshape(transpose(x, {0, 2, 1, 3}), {s[0] * s[2], s[1], s[3]});
    Mask gmask_out;
    auto y = latent_block_groups(ctx, prefix, grouped,
                                 mask_groups_temporal(mask), cfg, &gmask_out);
    if (out_mask) {
      Mask m(Shape{s[0], latent_len, s[2]});
      for (int64_t ai = 0; ai < s[0]; ++ai)
        for (int64_t ti = 0; ti < latent_len; ++ti)
          for (int64_t si = 0; si < s[2]; ++si)
            m.at(ai, ti, si) = gmask_out.at(ai * s[2] + si, ti);
      *out_mask = std::move(m);
    }
    return transpose(reshape(y, {s[0], s[2], latent_len, s[3]}),
                     {0, 2, 1, 3});
  }
  if (axis == AttnAxis::kSpatial) {
    auto grouped = reshape(x, {s[0] * s[1], s[2], s[3]});
    Mask gmask_out;
    auto y = latent_block_groups(ctx, prefix, grouped,
                                 mask_groups_spatial(mask), cfg, &gmask_out);
    if (out_mask) {
      *out_mask = Mask(Shape{s[0], s[1], latent_len}, gmask_out.data());
    }
    return reshape(y, {s[0], s[1], latent_len, s[3]});
  }
  throw UsageError("factorized_latent_query_block: axis must be temporal or "
                   "spatial");
}

template <typename T>
Var<T> decoder_block(AttnCtx<T>& ctx, const std::string& prefix, Var<T> q,
                     Var<T> z, const Mask& z_mask, const BlockConfig& cfg) {
  cfg.validate();
  const Shape& qs = q.value().shape();
  const Shape& zs = z.value().shape();
  if (qs.size() != 3 || zs.size() != 3 || qs[0] != zs[0]) {
    throw ShapeError("decoder_block: q and z must be [A,*,D] with matching "
                     "agents");
  }
  if (zs[1] == 0) throw ShapeError("decoder_block: empty encoding");
  check_agents_have_tokens<T>(z_mask, zs[1]);

  auto hq = ln3(ctx, q, prefix + "/sa/ln1");
  auto q1 = add(q, maybe_dropout(ctx, mha(ctx, prefix + "/sa", hq, hq,
                                          nullptr, cfg),
                                 cfg.dropout));
  auto hq2 = ln3(ctx, q1, prefix + "/ca/lnq");
  auto hkv = ln3(ctx, z, prefix + "/ca/lnkv");
  auto q2 = add(q1, maybe_dropout(ctx, mha(ctx, prefix + "/ca", hq2, hkv,
                                           &z_mask, cfg),
                                  cfg.dropout));
  auto f = ffn(ctx, prefix, ln3(ctx, q2, prefix + "/ln2"));
  return add(q2, maybe_dropout(ctx, f, cfg.dropout));
}

namespace {

template <typename T>
void register_attention_core(ParamStore<T>& ps, const std::string& p,
                             int64_t d, Rng& rng) {
  init_xavier(ps.create(p + "/wq", {d, d}), rng);
  ps.create(p + "/bq", {d});
  init_xavier(ps.create(p + "/wk", {d, d}), rng);
  ps.create(p + "/bk", {d});
  init_xavier(ps.create(p + "/wv", {d, d}), rng);
  ps.create(p + "/bv", {d});
  init_xavier(ps.create(p + "/wo", {d, d}), rng);
  ps.create(p + "/bo", {d});
}

template <typename T>
void register_ln(ParamStore<T>& ps, const std::string& p, int64_t d) {
  init_fill(ps.create(p + "_g", {d}), 1.0);
  ps.create(p + "_b", {d});
}

template <typename T>
void register_ffn(ParamStore<T>& ps, const std::string& p, int64_t d,
                  int64_t f, Rng& rng) {
  init_xavier(ps.create(p + "/ffw1", {f, d}), rng);
  ps.create(p + "/ffb1", {f});
  init_xavier(ps.create(p + "/ffw2", {d, f}), rng);
  ps.create(p + "/ffb2", {d});
}

}  // namespace

template <typename T>
void register_self_attention_block(ParamStore<T>& ps,
                                   const std::string& prefix,
                                   const BlockConfig& cfg, Rng& rng) {
  cfg.validate();
  register_ln(ps, prefix + "/ln1", cfg.hidden);
  register_attention_core(ps, prefix, cfg.hidden, rng);
  register_ln(ps, prefix + "/ln2", cfg.hidden);
  register_ffn(ps, prefix, cfg.hidden, cfg.intermediate, rng);
}

template <typename T>
void register_latent_query_block(ParamStore<T>& ps, const std::string& prefix,
                                 const BlockConfig& cfg, int64_t latent_len,
                                 Rng& rng) {
  cfg.validate();
  if (latent_len < 1) throw UsageError("latent length must be >= 1");
  init_normal(ps.create(prefix + "/latent", {latent_len, cfg.hidden}), rng,
              0.02);
  register_ln(ps, prefix + "/lnq", cfg.hidden);
  register_ln(ps, prefix + "/lnkv", cfg.hidden);
  register_attention_core(ps, prefix, cfg.hidden, rng);
  register_ln(ps, prefix + "/ln2", cfg.hidden);
  register_ffn(ps, prefix, cfg.hidden, cfg.intermediate, rng);
}

template <typename T>
void register_decoder_block(ParamStore<T>& ps, const std::string& prefix,
                            const BlockConfig& cfg, Rng& rng) {
  cfg.validate();
  register_ln(ps, prefix + "/sa/ln1", cfg.hidden);
  register_attention_core(ps, prefix + "/sa", cfg.hidden, rng);
  register_ln(ps, prefix + "/ca/lnq", cfg.hidden);
  register_ln(ps, prefix + "/ca/lnkv", cfg.hidden);
  register_attention_core(ps, prefix + "/ca", cfg.hidden, rng);
  register_ln(ps, prefix + "/ln2", cfg.hidden);
  register_ffn(ps, prefix, cfg.hidden, cfg.intermediate, rng);
}

#define TRAJCAST_INSTANTIATE_BLOCKS(T)                                       \
  template Var<T> self_attention_block<T>(AttnCtx<T>&, const std::string&,   \
                                          Var<T>, const Mask&,               \
                                          const BlockConfig&);               \
  template Var<T> factorized_block<T>(AttnCtx<T>&, const std::string&,       \
                                      Var<T>, const Mask&, AttnAxis,         \
                                      const BlockConfig&);                   \
  template Var<T> latent_query_block<T>(AttnCtx<T>&, const std::string&,     \
                                        Var<T>, const Mask&,                 \
                                        const BlockConfig&, Mask*);          \
  template Var<T> factorized_latent_query_block<T>(                          \
      AttnCtx<T>&, const std::string&, Var<T>, const Mask&, AttnAxis,        \
      int64_t, const BlockConfig&, Mask*);                                   \
  template Var<T> decoder_block<T>(AttnCtx<T>&, const std::string&, Var<T>,  \
                                   Var<T>, const Mask&, const BlockConfig&); \
  template void register_self_attention_block<T>(                            \
      ParamStore<T>&, const std::string&, const BlockConfig&, Rng&);         \
  template void register_latent_query_block<T>(                              \
      ParamStore<T>&, const std::string&, const BlockConfig&, int64_t,       \
      Rng&);                                                                 \
  template void register_decoder_block<T>(ParamStore<T>&,                    \
                                          const std::string&,                \
                                          const BlockConfig&, Rng&);

TRAJCAST_INSTANTIATE_BLOCKS(float)
TRAJCAST_INSTANTIATE_BLOCKS(double)

#undef TRAJCAST_INSTANTIATE_BLOCKS

}  // namespace trajcast
