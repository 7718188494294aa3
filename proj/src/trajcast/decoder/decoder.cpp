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

#include "trajcast/decoder/decoder.hpp"

#include <cmath>

namespace trajcast {

void DecoderConfig::validate() const {
  block.validate();
  if (depth < 1) throw UsageError("decoder depth must be >= 1");
  if (modes < 1) throw UsageError("decoder needs at least one mode query");
  if (future_steps < 1) throw UsageError("future horizon must be >= 1");
  if (logstd_clamp <= 0) throw UsageError("logstd clamp must be positive");
}

template <typename T>
void register_decoder(ParamStore<T>& ps, const DecoderConfig& cfg, Rng& rng,
                      const std::string& prefix) {
  cfg.validate();
  const int64_t d = cfg.block.hidden;
  init_normal(ps.create(prefix + "/queries", {cfg.modes, d}), rng, 0.02);
  if (cfg.encoder_width != d) {
    init_xavier(ps.create(prefix + "/zproj/w", {d, cfg.encoder_width}), rng);
    ps.create(prefix + "/zproj/b", {d});
  }
  for (int64_t i = 0; i < cfg.depth; ++i) {
    register_decoder_block(ps, prefix + "/b" + std::to_string(i), cfg.block,
                           rng);
  }
  // Output heads start at zero: uniform mixture, zero trajectories.
  ps.create(prefix + "/head/logit/w", {1, d});
  ps.create(prefix + "/head/logit/b", {1});
  ps.create(prefix + "/head/traj/w", {4 * cfg.future_steps, d});
  ps.create(prefix + "/head/traj/b", {4 * cfg.future_steps});
}

namespace {

template <typename T>
Var<T> linear_tokens(AttnCtx<T>& ctx, Var<T> x, const std::string& w,
                     const std::string& b) {
  const Shape& s = x.value().shape();
  auto flat = reshape(x, {s[0] * s[1], s[2]});
  auto wv = ctx.params->at(w);
  auto out = add_bias(matmul(flat, transpose(wv, {1, 0})), ctx.params->at(b));
  return reshape(out, {s[0], s[1], wv.value().dim(0)});
}

}  // namespace

template <typename T>
MixtureOut<T> decode(AttnCtx<T>& ctx, const DecoderConfig& cfg,
                     const SceneEncoding<T>& enc, const std::string& prefix) {
  cfg.validate();
  const Shape& zs = enc.z.value().shape();
  if (zs.size() != 3 || zs[1] == 0) {
    throw ShapeError("decode: empty or malformed scene encoding");
  }
  const int64_t a = zs[0];

  Var<T> z = enc.z;
  if (cfg.encoder_width != cfg.block.hidden) {
    z = linear_tokens(ctx, z, prefix + "/zproj/w", prefix + "/zproj/b");
  } else if (zs[2] != cfg.block.hidden) {
    throw ShapeError("decode: encoding width does not match decoder width");
  }

  auto q = broadcast0(ctx.params->at(prefix + "/queries"), a);
  for (int64_t i = 0; i < cfg.depth; ++i) {
    q = decoder_block(ctx, prefix + "/b" + std::to_string(i), q, z, enc.mask,
                      cfg.block);
  }

  MixtureOut<T> out;
  out.logits = reshape(
      linear_tokens(ctx, q, prefix + "/head/logit/w", prefix + "/head/logit/b"),
      {a, cfg.modes});
  auto series = linear_tokens(ctx, q, prefix + "/head/traj/w",
                              prefix + "/head/traj/b");
  auto grid = reshape(series, {a, cfg.modes, cfg.future_steps, int64_t{4}});
  out.means = slice(grid, 3, 0, 2);
  out.logstd = clamp(slice(grid, 3, 2, 2), -cfg.logstd_clamp,
                     cfg.logstd_clamp);
  return out;
}

template <typename T>
Var<T> mixture_log_prob(const MixtureOut<T>& mix, const Array<T>& gt,
                        const std::vector<int64_t>& mode_per_agent) {
  const Shape& ms = mix.means.value().shape();
  if (gt.shape() != Shape({ms[0], ms[2], ms[3]})) {
    throw ShapeError("mixture_log_prob: ground truth must be [A, T_f, 2], "
                     "got " + shape_str(gt.shape()));
  }
  Tape<T>& tape = *mix.means.tape;
  auto mu = take_index1(mix.means, mode_per_agent);
  auto ls = take_index1(mix.logstd, mode_per_agent);
  auto diff = sub(tape.constant(gt), mu);
  auto zscore = mul(diff, vexp(scale(ls, -1.0)));
  auto quad = mul(zscore, zscore);
  // per element: -0.5*log(2*pi) - logstd - 0.5*z^2
  auto term = add_scalar(sub(scale(quad, -0.5), ls),
                         -0.5 * std::log(2.0 * M_PI));
  return sum_trailing(term);
}

int64_t decoder_scores_per_agent(const DecoderConfig& cfg, int64_t l_z) {
  return cfg.depth * (cfg.modes * cfg.modes + cfg.modes * l_z);
}

#define TRAJCAST_INSTANTIATE_DECODER(T)                                     \
  template void register_decoder<T>(ParamStore<T>&, const DecoderConfig&,   \
                                    Rng&, const std::string&);              \
  template MixtureOut<T> decode<T>(AttnCtx<T>&, const DecoderConfig&,       \
                                   const SceneEncoding<T>&,                 \
                                   const std::string&);                     \
  template Var<T> mixture_log_prob<T>(const MixtureOut<T>&,                 \
                                      const Array<T>&,                      \
                                      const std::vector<int64_t>&);

TRAJCAST_INSTANTIATE_DECODER(float)
TRAJCAST_INSTANTIATE_DECODER(double)

#undef TRAJCAST_INSTANTIATE_DECODER

}  // namespace trajcast
