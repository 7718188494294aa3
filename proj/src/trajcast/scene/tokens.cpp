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

#include "trajcast/scene/tokens.hpp"

#include <algorithm>
#include <string>

namespace trajcast {

namespace {

// 0/1 multiplier expanding a cell mask over the feature axis.
template <typename T>
Array<T> mask_multiplier(const Mask& mask, int64_t d) {
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

}  // namespace

template <typename T>
Var<T> project(Var<T> x, Var<T> weight, Var<T> bias, const Mask& mask) {
  const Shape& xs = x.value().shape();
  if (xs.size() != 4) {
    throw ShapeError("project: expects [A,T,S,D_m], got " + shape_str(xs));
  }
  const Shape& ws = weight.value().shape();
  if (ws.size() != 2 || ws[1] != xs[3]) {
    throw ShapeError("project: weight " + shape_str(ws) +
                     " does not accept feature dim " + std::to_string(xs[3]));
  }
  const int64_t d_out = ws[0];
  const int64_t rows = xs[0] * xs[1] * xs[2];
  auto flat = reshape(x, {rows, xs[3]});
  auto projected = relu(add_bias(matmul(flat, transpose(weight, {1, 0})),
                                 bias));
  auto gated = mul_const(projected, mask_multiplier<T>(mask, d_out));
  return reshape(gated, {xs[0], xs[1], xs[2], d_out});
}

template <typename T>
Var<T> add_positional(Var<T> x, Var<T> table) {
  const Shape& xs = x.value().shape();
  const Shape& ts = table.value().shape();
  if (xs.size() != 4 || ts.size() != 2 || ts[0] != xs[1] * xs[2] ||
      ts[1] != xs[3]) {
    throw ShapeError("add_positional: table " + shape_str(ts) +
                     " does not cover " + shape_str(xs));
  }
  auto flat = reshape(x, {xs[0], xs[1] * xs[2], xs[3]});
  auto shifted = add_broadcast0(flat, table);
  return reshape(shifted, xs);
}

template <typename T>
TokenSequence<T> flatten_tokens(const ProjectedModality<T>& pm) {
  const Shape& xs = pm.values.value().shape();
  const int64_t a = xs[0], t = xs[1], s = xs[2], d = xs[3];
  TokenSequence<T> out;
  out.tokens = reshape(pm.values, {a, t * s, d});
  out.mask = Mask({a, t * s}, pm.mask.data());
  out.provenance.reserve(static_cast<size_t>(t * s));
  for (int64_t ti = 0; ti < t; ++ti)
    for (int64_t si = 0; si < s; ++si)
      out.provenance.push_back({pm.modality, ti, si});
  return out;
}

template <typename T>
TokenSequence<T> concat_sequences(const std::vector<TokenSequence<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_sequences: no parts");
  const int64_t a = parts[0].tokens.value().dim(0);
  std::vector<Var<T>> tok;
  int64_t total = 0;
  for (const auto& p : parts) {
    if (p.tokens.value().dim(0) != a) {
      throw ShapeError("concat_sequences: inconsistent agent counts");
    }
    tok.push_back(p.tokens);
    total += p.length();
  }
  TokenSequence<T> out;
  out.tokens = concat(tok, 1);
  out.mask = Mask({a, total});
  out.provenance.reserve(static_cast<size_t>(total));
  int64_t off = 0;
  for (const auto& p : parts) {
    const int64_t l = p.length();
    for (int64_t i = 0; i < a; ++i)
      std::copy(p.mask.ptr() + i * l, p.mask.ptr() + (i + 1) * l,
                out.mask.ptr() + i * total + off);
    out.provenance.insert(out.provenance.end(), p.provenance.begin(),
                          p.provenance.end());
    off += l;
  }
  return out;
}

template <typename T>
TokenGrid<T> concat_grid(const std::vector<ProjectedModality<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_grid: no parts");
  const int64_t a = parts[0].values.value().dim(0);
  int64_t t_common = 1;
  for (const auto& p : parts) {
    if (p.values.value().dim(0) != a) {
      throw ShapeError("concat_grid: inconsistent agent counts");
    }
    t_common = std::max(t_common, p.values.value().dim(1));
  }
  std::vector<Var<T>> vals;
  std::vector<const ProjectedModality<T>*> srcs;
  int64_t s_total = 0;
  for (const auto& p : parts) {
    const int64_t t = p.values.value().dim(1);
    if (t == t_common) {
      vals.push_back(p.values);
    } else if (t == 1) {
      vals.push_back(tile_axis1(p.values, t_common));
    } else {
      throw ShapeError("concat_grid: temporal lengths differ (" +
                       std::to_string(t) + " vs " +
                       std::to_string(t_common) + ")");
    }
    srcs.push_back(&p);
    s_total += p.values.value().dim(2);
  }
  TokenGrid<T> out;
  out.values = concat(vals, 2);
  out.mask = Mask({a, t_common, s_total});
  out.provenance.assign(static_cast<size_t>(t_common * s_total), {});
  int64_t off = 0;
  for (const auto* p : srcs) {
    const int64_t t = p->values.value().dim(1);
    const int64_t s = p->values.value().dim(2);
    for (int64_t ai = 0; ai < a; ++ai)
      for (int64_t ti = 0; ti < t_common; ++ti) {
        const int64_t t_src = t == 1 ? 0 : ti;
        for (int64_t si = 0; si < s; ++si)
          out.mask.at(ai, ti, off + si) = p->mask.at(ai, t_src, si);
      }
    for (int64_t ti = 0; ti < t_common; ++ti)
      for (int64_t si = 0; si < s; ++si)
        out.provenance[static_cast<size_t>(ti * s_total + off + si)] = {
            p->modality, t == 1 ? 0 : ti, si};
    off += s;
  }
  return out;
}

#define TRAJCAST_INSTANTIATE_TOKENS(T)                                      \
  template Var<T> project<T>(Var<T>, Var<T>, Var<T>, const Mask&);          \
  template Var<T> add_positional<T>(Var<T>, Var<T>);                        \
  template TokenSequence<T> flatten_tokens<T>(const ProjectedModality<T>&); \
  template TokenSequence<T> concat_sequences<T>(                            \
      const std::vector<TokenSequence<T>>&);                                \
  template TokenGrid<T> concat_grid<T>(                                     \
      const std::vector<ProjectedModality<T>>&);

TRAJCAST_INSTANTIATE_TOKENS(float)
TRAJCAST_INSTANTIATE_TOKENS(double)

#undef TRAJCAST_INSTANTIATE_TOKENS

}  // namespace trajcast
