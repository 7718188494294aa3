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

#ifndef TRAJCAST_IO_CONFIG_HPP_
#define TRAJCAST_IO_CONFIG_HPP_

#include <string>
#include <vector>

#include "trajcast/io/json_util.hpp"
#include "trajcast/metrics/metrics.hpp"
#include "trajcast/model/model.hpp"
#include "trajcast/objective/objective.hpp"
#include "trajcast/synthdata/generator.hpp"

namespace trajcast {

// Benchmark sweep over the (fusion x regime x latent ratio) grid. A ratio
// of 0 means no latent block (the baseline model).
struct BenchConfig {
  std::vector<std::string> fusions = {"early", "late", "hierarchical"};
  std::vector<std::string> regimes = {"multi_axis"};
  std::vector<double> ratios = {0.25, 0.5, 1.0};
  int64_t forward_passes = 30;
  int64_t train_steps = 0;  // 0 skips training; min_ade column stays empty
  int64_t train_scenes = 512;
  int64_t eval_scenes = 128;

  void validate() const;
};

// The single source of run-time configuration: model architecture, data
// generation, training, aggregation, metrics, and the bench sweep.
struct RunConfig {
  std::string precision = "f32";  // f32 for training, f64 for checks
  int64_t scenes_count = 1000;    // default generate count
  ModelConfig model;              // dims mirror the data section
  GeneratorConfig data;
  TrainConfig train;
  AggregationConfig aggregation;
  MetricsConfig metrics;
  BenchConfig bench;

  void validate() const;
};

RunConfig default_config();

Json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);

// FNV-1a of the canonical (sorted-key) dump.
std::string config_hash(const RunConfig& cfg);
// Hash of only the model-determining fields (architecture, scene extents,
// precision); stored in checkpoints and verified on load.
std::string model_signature(const RunConfig& cfg);

}  // namespace trajcast

#endif  // TRAJCAST_IO_CONFIG_HPP_
