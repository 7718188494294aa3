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

#ifndef TRAJCAST_SCENE_TOKENS_HPP_
#define TRAJCAST_SCENE_TOKENS_HPP_

#include <vector>

#include "trajcast/core/ops.hpp"
#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

// Where a token came from: its modality and source (t, s) cell.
struct TokenProvenance {
  ModalityId modality;
  int64_t t = 0, s = 0;

  bool operator==(const TokenProvenance&) const = default;
};

// A projected, position-embedded modality still in [A, T, S, D] form.
template <typename T>
struct ProjectedModality {
  Var<T> values;  // [A, T, S, D]
  Mask mask;      // [A, T, S]
  ModalityId modality = ModalityId::kHistory;
};

// Flattened tokens [A, L, D] with per-token validity and provenance.
template <typename T>
struct TokenSequence {
  Var<T> tokens;  // [A, L, D]
  Mask mask;      // [A, L]
  std::vector<TokenProvenance> provenance;

  int64_t length() const { return tokens.value().dim(1); }
};

// Factorized-regime token grid [A, T, S, D] with validity [A, T, S].
template <typename T>
struct TokenGrid {
  Var<T> values;
  Mask mask;
  std::vector<TokenProvenance> provenance;  // indexed t * S + s

  int64_t time_len() const { return values.value().dim(1); }
  int64_t space_len() const { return values.value().dim(2); }
};

// relu(W x + b) over the last axis, W: [D, D_m], b: [D]; masked cells are
// zeroed afterwards.
template <typename T>
Var<T> project(Var<T> x, Var<T> weight, Var<T> bias, const Mask& mask);

// Adds the per-modality positional table, row t*S+s for cell (t, s).
// Tables are trainable and zero-initialized, so freshly initialized models
// leave tokens unchanged.
template <typename T>
Var<T> add_positional(Var<T> x, Var<T> table);

// Flattens [A, T, S, D] to [A, T*S, D] tokens with provenance.
template <typename T>
TokenSequence<T> flatten_tokens(const ProjectedModality<T>& pm);

// Concatenates flattened modalities along L (multi-axis regimes). Raises
// on inconsistent agent counts.
template <typename T>
TokenSequence<T> concat_sequences(const std::vector<TokenSequence<T>>& parts);

// Concatenates modalities along S after tiling any T=1 modality to the
// common temporal length (factorized regimes).
template <typename T>
TokenGrid<T> concat_grid(const std::vector<ProjectedModality<T>>& parts);

}  // namespace trajcast

#endif  // TRAJCAST_SCENE_TOKENS_HPP_
