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

#ifndef TRAJCAST_OBJECTIVE_OBJECTIVE_HPP_
#define TRAJCAST_OBJECTIVE_OBJECTIVE_HPP_

#include <functional>
#include <map>
#include <vector>

#include "trajcast/model/model.hpp"

namespace trajcast {

// Index of the mode whose mean trajectory is closest to the ground truth
// (average L2 distance over timesteps), per agent; ties break to the
// lowest index. means: [A, k, T_f, 2], gt: [A, T_f, 2].
template <typename T>
std::vector<int64_t> closest_mode(const Array<T>& means, const Array<T>& gt);

// Winner-take-all mixture loss: a classification term (negative
// log-likelihood of selecting the closest mode) plus a regression term
// (negative log-probability of the ground truth under that mode), averaged
// over agents. The closest-mode index is a constant: no gradient flows
// through the argmin.
template <typename T>
struct LossOut {
  Var<T> total;
  Var<T> classification;
  Var<T> regression;
  std::vector<int64_t> mode_index;
};

template <typename T>
LossOut<T> wta_loss(const MixtureOut<T>& mix, const Array<T>& gt_ego);

struct TrainConfig {
  int64_t steps = 2000;
  int64_t batch_size = 16;
  double learning_rate = 2e-4;  // decays linearly to 0
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double dropout = 0.0;
  uint64_t seed = 7;
  int64_t log_every = 50;

  void validate() const;
};

// lr(t) = lr0 * (1 - t / steps), so lr(0) = lr0 and lr(steps) = 0.
double lr_at_step(const TrainConfig& cfg, int64_t step);

// Decoupled-weight-decay adaptive-moment optimizer.
template <typename T>
class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  void step(ParamStore<T>& params,
            const std::map<std::string, Array<T>>& grads, double lr);

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  int64_t t_ = 0;
  std::map<std::string, Array<T>> m_, v_;
};

struct LossRecord {
  int64_t step = 0;
  double total = 0, classification = 0, regression = 0;
  double lr = 0;
};

using ProgressFn = std::function<void(const LossRecord&)>;

// Trains in place. Batches are drawn from the seeded generator; per-scene
// gradients accumulate in a fixed order so runs are deterministic. Ensemble
// decoders train jointly: their losses are summed per scene. A non-finite
// loss aborts with the step index.
template <typename T>
std::vector<LossRecord> train_model(Model<T>& model,
                                    const std::vector<SceneTensors>& dataset,
                                    const TrainConfig& cfg,
                                    const ProgressFn& progress = nullptr);

}  // namespace trajcast

#endif  // TRAJCAST_OBJECTIVE_OBJECTIVE_HPP_
