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

#ifndef TRAJCAST_CORE_OPS_HPP_
#define TRAJCAST_CORE_OPS_HPP_

#include <vector>

#include "trajcast/core/rng.hpp"
#include "trajcast/core/tape.hpp"

namespace trajcast {

// Per-precision tolerance constants. All test assertions go through these
// so each mode has exactly one set of thresholds.
template <typename T>
struct Tolerances;

template <>
struct Tolerances<double> {
  static constexpr double grad_rel = 1e-4;
  static constexpr double fd_step = 1e-5;
  static constexpr double softmax_sum = 1e-12;
  static constexpr double close = 1e-9;
};

template <>
struct Tolerances<float> {
  static constexpr double grad_rel = 1e-2;
  static constexpr double fd_step = 1e-3;
  static constexpr double softmax_sum = 1e-6;
  static constexpr double close = 1e-5;
};

// Elementwise.
template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul_const(Var<T> x, Array<T> c);
template <typename T>
Var<T> scale(Var<T> x, double c);
template <typename T>
Var<T> add_scalar(Var<T> x, double c);
template <typename T>
Var<T> relu(Var<T> x);
template <typename T>
Var<T> vexp(Var<T> x);
template <typename T>
Var<T> clamp(Var<T> x, double lo, double hi);
template <typename T>
Var<T> dropout(Var<T> x, double rate, Rng& rng);

// Structural. reshape/transpose/concat/slice copy data; gradients mirror
// the index mapping.
template <typename T>
Var<T> reshape(Var<T> x, Shape target);
template <typename T>
Var<T> transpose(Var<T> x, std::vector<int> perm);
template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, int axis);
template <typename T>
Var<T> slice(Var<T> x, int axis, int64_t start, int64_t len);
template <typename T>
Var<T> broadcast0(Var<T> q, int64_t n);
// Repeats a length-1 axis 1 n times: [A, 1, ...] -> [A, n, ...].
template <typename T>
Var<T> tile_axis1(Var<T> x, int64_t n);

// Linear algebra.
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
template <typename T>
Var<T> bmm(Var<T> a, Var<T> b);
template <typename T>
Var<T> add_bias(Var<T> x, Var<T> b);
template <typename T>
Var<T> add_broadcast0(Var<T> x, Var<T> t);

// Normalizations over the last axis.
//
// softmax_masked excludes masked positions exactly: masked outputs are 0
// and unmasked outputs renormalize over the surviving entries. A row with
// no unmasked entry is a degenerate attention row and raises NumericError.
template <typename T>
Var<T> softmax_masked(Var<T> x, const Mask* mask);
template <typename T>
Var<T> log_softmax(Var<T> x);
template <typename T>
Var<T> layernorm(Var<T> x, Var<T> gain, Var<T> bias);

// Reductions and indexed selection.
template <typename T>
Var<T> sum_all(Var<T> x);
template <typename T>
Var<T> mean_all(Var<T> x);
template <typename T>
Var<T> sum_trailing(Var<T> x);
// x: [A, T, S, D], mask: [A, T, S] -> [A, S, D]; mask-aware mean over T.
// Slots with no valid timestep produce zeros; an agent with no valid cell
// at all raises NumericError.
template <typename T>
Var<T> masked_mean_axis1(Var<T> x, const Mask& mask);
// x: [A, k, ...], idx[a] in [0, k) -> [A, ...]. No gradient through idx.
template <typename T>
Var<T> take_index1(Var<T> x, const std::vector<int64_t>& idx);

}  // namespace trajcast

#endif  // TRAJCAST_CORE_OPS_HPP_
