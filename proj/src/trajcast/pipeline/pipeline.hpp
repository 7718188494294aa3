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

#ifndef TRAJCAST_PIPELINE_PIPELINE_HPP_
#define TRAJCAST_PIPELINE_PIPELINE_HPP_

#include <memory>
#include <string>
#include <vector>

#include "trajcast/io/config.hpp"

namespace trajcast {

// A trained (or loaded) model at either precision, tied to its config.
class AnyModel {
 public:
  AnyModel(RunConfig cfg, std::unique_ptr<Model<float>> mf,
           std::unique_ptr<Model<double>> md)
      : cfg_(std::move(cfg)), f_(std::move(mf)), d_(std::move(md)) {}

  const RunConfig& config() const { return cfg_; }
  bool is_f32() const { return f_ != nullptr; }
  Model<float>& f32() { return *f_; }
  Model<double>& f64() { return *d_; }
  const Model<float>& f32() const { return *f_; }
  const Model<double>& f64() const { return *d_; }
  int64_t parameter_count() const {
    return is_f32() ? f_->parameter_count() : d_->parameter_count();
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<Model<float>> f_;
  std::unique_ptr<Model<double>> d_;
};

namespace pipeline {

// Fresh model at the config's precision, initialized from train.seed.
AnyModel init_model(const RunConfig& cfg);

std::vector<SceneTensors> generate(const RunConfig& cfg, int64_t n_scenes);

// Trains in place; returns the loss curve.
std::vector<LossRecord> train(AnyModel& model,
                              const std::vector<SceneTensors>& scenes,
                              const ProgressFn& progress = nullptr);

// Forward over every scene: per-agent mixtures in the global frame, with
// ensemble decoders merged (probabilities divided by the member count).
std::vector<PredictionRecord> predict(const AnyModel& model,
                                      const std::vector<SceneTensors>& scenes);

// Aggregates each record to cfg.max_trajectories; records that already
// have fewer modes pass through unchanged.
std::vector<PredictionRecord> aggregate_records(
    const std::vector<PredictionRecord>& preds, const AggregationConfig& cfg);

// Merges prediction sets covering the same (scene, agent) pairs.
std::vector<PredictionRecord> merge_prediction_sets(
    const std::vector<std::vector<PredictionRecord>>& sets);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const RunConfig& cfg, const std::string& path);

// Writes the loss curve as CSV (step, total, classification, regression,
// lr).
void write_loss_curve(const std::string& path,
                      const std::vector<LossRecord>& curve);

struct BenchRow {
  std::string fusion, regime;
  double ratio = 0;  // 0 = no latent queries
  int64_t params = 0;
  int64_t attn_scores = 0;  // closed-form counts, verified instrumented
  double forward_ms_median = 0;
  double min_ade = -1;  // -1 when bench.train_steps == 0
};

// Sweeps the (fusion x regime x ratio) grid: parameter count, closed-form
// attention scores (checked against the instrumented forward), median
// forward wall-clock, and post-training minADE on a held-out split.
std::vector<BenchRow> bench(const RunConfig& cfg,
                            const ProgressFn& progress = nullptr);

std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace pipeline

}  // namespace trajcast

#endif  // TRAJCAST_PIPELINE_PIPELINE_HPP_
