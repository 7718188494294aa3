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

#ifndef TRAJCAST_AGGREGATE_AGGREGATE_HPP_
#define TRAJCAST_AGGREGATE_AGGREGATE_HPP_

#include <vector>

#include "trajcast/core/array.hpp"

namespace trajcast {

// One agent's mixture: probabilities plus mean trajectories (and
// optionally log-stddevs, carried through aggregation as probability-
// weighted means).
struct ModeSet {
  std::vector<double> probs;     // [k]
  Array<double> trajectories;    // [k, T_f, 2]
  Array<double> logstd;          // [k, T_f, 2] or empty

  int64_t modes() const { return static_cast<int64_t>(probs.size()); }
  int64_t horizon() const { return trajectories.dim(1); }
  void validate() const;
};

struct AggregationConfig {
  double distance_threshold = 2.3;  // scene units, endpoint distance
  int64_t refine_iterations = 3;
  int64_t max_trajectories = 6;  // k_out

  void validate() const;
};

struct Centroids {
  std::vector<double> probs;      // aggregated mass per centroid
  Array<double> trajectories;     // [m, T_f, 2]
  Array<double> logstd;           // [m, T_f, 2] or empty
  std::vector<int64_t> seed_modes;  // original index each centroid grew from
};

// Greedy centroid selection: repeatedly pick the uncovered mode whose
// endpoint-distance-D neighborhood covers the most uncovered probability
// mass (ties to the lowest mode index) until every mode is covered.
// Returns the selected mode indices in selection order.
std::vector<int64_t> greedy_init(const ModeSet& modes, double threshold);

Centroids centroids_from_seeds(const ModeSet& modes,
                               const std::vector<int64_t>& seeds);

// k-means style refinement at fixed centroid count: each iteration sets
// every centroid to the probability-weighted average of its assigned
// modes (probability = sum of assigned mass; an empty cluster keeps its
// trajectory with zero mass), then reassigns modes to the nearest
// centroid by endpoint distance.
Centroids refine(Centroids centroids, const ModeSet& modes,
                 const AggregationConfig& cfg);

// Ensemble merge: concatenates members' modes and divides probabilities
// by the member count. Horizons must match.
ModeSet merge_ensemble(const std::vector<ModeSet>& members);

// Full aggregation: greedy_init then refine; oversized results keep the
// top k_out centroids by probability, undersized ones are padded with the
// highest-probability original modes not already used as seeds. Output
// probabilities are renormalized to sum to 1.
ModeSet aggregate_to_k(const ModeSet& modes, const AggregationConfig& cfg);

}  // namespace trajcast

#endif  // TRAJCAST_AGGREGATE_AGGREGATE_HPP_
