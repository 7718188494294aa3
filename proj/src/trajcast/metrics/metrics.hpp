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

#ifndef TRAJCAST_METRICS_METRICS_HPP_
#define TRAJCAST_METRICS_METRICS_HPP_

#include <string>
#include <vector>

#include "trajcast/aggregate/aggregate.hpp"
#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

// One agent's prediction as consumed by evaluation: the mode set in the
// global scene frame.
struct PredictionRecord {
  int64_t scene_id = 0;
  int64_t agent = 0;
  ModeSet modes;
};

struct HorizonThreshold {
  int64_t step = 0;  // 1-based timestep within the horizon
  double threshold = 0;
};

struct MetricsConfig {
  int64_t top_k = 6;
  std::vector<HorizonThreshold> miss_thresholds = {{4, 1.0}, {8, 2.0}};
  double map_threshold = 2.0;     // endpoint match radius for mAP
  double overlap_radius = 1.0;    // overlap if distance < 2 * radius
  double bucket_stationary_displacement = 2.0;
  double bucket_turn_angle = 0.5235987755982988;  // pi / 6

  void validate() const;
};

struct MetricsReport {
  double min_ade = 0;
  double min_fde = 0;
  double brier_min_fde = 0;
  double map_value = 0;
  double overlap = 0;
  std::vector<std::pair<int64_t, double>> min_de;     // per horizon step
  std::vector<std::pair<int64_t, double>> miss_rate;  // per horizon step
  int64_t agents_evaluated = 0;

  // Flat (name, value) view used for the text report and the CSV.
  std::vector<std::pair<std::string, double>> named() const;
};

namespace metrics {

// Top-k most likely mode indices, probability-descending, ties by index.
std::vector<int64_t> top_k_modes(const ModeSet& modes, int64_t k);

// preds: [k, T, 2] against gt [T, 2].
double min_ade(const Array<double>& preds, const Array<double>& gt);
double min_fde(const Array<double>& preds, const Array<double>& gt);
double min_de_at(const Array<double>& preds, const Array<double>& gt,
                 int64_t step);
bool miss_at(const Array<double>& preds, const Array<double>& gt,
             int64_t step, double threshold);

// Fraction of timesteps where the trajectory passes within 2*radius of any
// other agent's ground-truth position at the same timestep.
double overlap_fraction(const Array<double>& trajectory,
                        const std::vector<Array<double>>& others_gt,
                        double radius);

// Behavior bucket of a ground-truth future: stationary, straight,
// left_turn, or right_turn, from total displacement and net heading change.
std::string behavior_bucket(const Array<double>& gt,
                            const MetricsConfig& cfg);

// One scored prediction entry for mAP.
struct MapEntry {
  double confidence = 0;
  bool true_positive = false;
};

// Non-interpolated average precision: mean of precision-at-hit over all
// possible positives.
double average_precision(std::vector<MapEntry> entries, int64_t positives);

}  // namespace metrics

// Full evaluation of prediction records against their scenes. Records are
// matched by scene id; every record's horizon must not exceed the scene
// future. All distances are computed in the shared global frame.
MetricsReport evaluate_predictions(const std::vector<PredictionRecord>& preds,
                                   const std::vector<SceneTensors>& scenes,
                                   const MetricsConfig& cfg);

std::string report_to_text(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);

}  // namespace trajcast

#endif  // TRAJCAST_METRICS_METRICS_HPP_
