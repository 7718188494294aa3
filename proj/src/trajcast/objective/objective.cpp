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

#include "trajcast/objective/objective.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "trajcast/scene/frame.hpp"

namespace trajcast {

template <typename T>
std::vector<int64_t> closest_mode(const Array<T>& means, const Array<T>& gt) {
  if (means.rank() != 4 || gt.rank() != 3 || means.dim(0) != gt.dim(0) ||
      means.dim(2) != gt.dim(1) || means.dim(3) != 2 || gt.dim(2) != 2) {
    throw ShapeError("closest_mode: means [A,k,T,2] and gt [A,T,2] required");
  }
  const int64_t a = means.dim(0), k = means.dim(1), tf = means.dim(2);
  std::vector<int64_t> out(static_cast<size_t>(a), 0);
  for (int64_t ai = 0; ai < a; ++ai) {
    double best = std::numeric_limits<double>::infinity();
    for (int64_t ki = 0; ki < k; ++ki) {
      double dist = 0;
      for (int64_t t = 0; t < tf; ++t) {
        const double dx = static_cast<double>(means.at(ai, ki, t, 0)) -
                          static_cast<double>(gt.at(ai, t, 0));
        const double dy = static_cast<double>(means.at(ai, ki, t, 1)) -
                          static_cast<double>(gt.at(ai, t, 1));
        dist += std::sqrt(dx * dx + dy * dy);
      }
      dist /= static_cast<double>(tf);
      if (dist < best) {
        best = dist;
        out[static_cast<size_t>(ai)] = ki;
      }
    }
  }
  return out;
}

template <typename T>
LossOut<T> wta_loss(const MixtureOut<T>& mix, const Array<T>& gt_ego) {
  LossOut<T> out;
  out.mode_index = closest_mode(mix.means.value(), gt_ego);
  auto logp = log_softmax(mix.logits);
  auto picked = take_index1(logp, out.mode_index);
  out.classification = scale(mean_all(picked), -1.0);
  out.regression =
      scale(mean_all(mixture_log_prob(mix, gt_ego, out.mode_index)), -1.0);
  out.total = add(out.classification, out.regression);
  return out;
}

void TrainConfig::validate() const {
  if (steps < 1) throw UsageError("train: steps must be >= 1");
  if (batch_size < 1) throw UsageError("train: batch size must be >= 1");
  if (learning_rate < 0) {
    throw UsageError("train: learning rate must be >= 0");
  }
  if (weight_decay < 0) throw UsageError("train: weight decay must be >= 0");
  if (log_every < 1) throw UsageError("train: log_every must be >= 1");
}

double lr_at_step(const TrainConfig& cfg, int64_t step) {
  return cfg.learning_rate *
         (1.0 - static_cast<double>(step) / static_cast<double>(cfg.steps));
}

template <typename T>
void AdamW<T>::step(ParamStore<T>& params,
                    const std::map<std::string, Array<T>>& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Array<T>& g = git->second;
    Array<T>& m = m_.try_emplace(name, Array<T>(p.shape())).first->second;
    Array<T>& v = v_.try_emplace(name, Array<T>(p.shape())).first->second;
    for (int64_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = beta1_ * static_cast<double>(m[i]) +
                        (1.0 - beta1_) * gi;
      const double vi = beta2_ * static_cast<double>(v[i]) +
                        (1.0 - beta2_) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
      p[i] = static_cast<T>(static_cast<double>(p[i]) -
                            lr * (update + weight_decay_ *
                                               static_cast<double>(p[i])));
    }
  }
}

template <typename T>
std::vector<LossRecord> train_model(Model<T>& model,
                                    const std::vector<SceneTensors>& dataset,
                                    const TrainConfig& cfg,
                                    const ProgressFn& progress) {
  cfg.validate();
  if (dataset.empty()) throw DataError("train: empty dataset");

  Rng batch_rng = Rng::derive(cfg.seed, 1);
  Rng dropout_rng = Rng::derive(cfg.seed, 2);
  AdamW<T> opt(cfg.beta1, cfg.beta2, cfg.epsilon, cfg.weight_decay);
  const int64_t n = static_cast<int64_t>(dataset.size());

  // Ego-frame ground truth per scene, cast once.
  std::vector<Array<T>> gts;
  gts.reserve(dataset.size());
  for (const auto& scene : dataset) {
    Array<double> ego = ego_frame_future(scene);
    if (scene.future_steps() > model.config().future_steps) {
      // Truncate to the model horizon.
      const int64_t a = scene.agents();
      const int64_t tf = model.config().future_steps;
      Array<double> cut(Shape{a, tf, 2});
      for (int64_t ai = 0; ai < a; ++ai)
        for (int64_t t = 0; t < tf; ++t) {
          cut.at(ai, t, 0) = ego.at(ai, t, 0);
          cut.at(ai, t, 1) = ego.at(ai, t, 1);
        }
      ego = std::move(cut);
    }
    gts.push_back(cast_array<T>(ego));
  }

  std::vector<LossRecord> curve;
  for (int64_t step = 0; step < cfg.steps; ++step) {
    const double lr = lr_at_step(cfg, step);
    std::map<std::string, Array<T>> grads;
    double total = 0, cls = 0, reg = 0;

    for (int64_t b = 0; b < cfg.batch_size; ++b) {
      const int64_t idx = batch_rng.uniform_int(n);
      const SceneTensors& scene = dataset[static_cast<size_t>(idx)];
      Tape<T> tape;
      ParamBinding<T> binding = bind_params(tape, model.params());
      ForwardOptions<T> opts;
      opts.dropout_rng = cfg.dropout > 0 ? &dropout_rng : nullptr;
      auto mixtures = model.forward(tape, binding, scene, opts);

      Var<T> loss;
      for (size_t d = 0; d < mixtures.size(); ++d) {
        LossOut<T> l = wta_loss(mixtures[d], gts[static_cast<size_t>(idx)]);
        cls += static_cast<double>(l.classification.value()[0]);
        reg += static_cast<double>(l.regression.value()[0]);
        loss = d == 0 ? l.total : add(loss, l.total);
      }
      const double scene_loss = static_cast<double>(loss.value()[0]);
      if (!std::isfinite(scene_loss)) {
        throw NumericError("train: non-finite loss at step " +
                           std::to_string(step));
      }
      total += scene_loss;

      tape.backward(loss);
      for (const auto& [name, var] : binding.vars) {
        const Array<T>& g = tape.grad(var);
        auto it = grads.find(name);
        if (it == grads.end()) {
          grads.emplace(name, g);
        } else {
          Array<T>& acc = it->second;
          for (int64_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
      }
    }

    const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
    for (auto& [name, g] : grads)
      for (int64_t i = 0; i < g.size(); ++i)
        g[i] = static_cast<T>(static_cast<double>(g[i]) * inv_b);
    opt.step(model.params(), grads, lr);

    if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
      LossRecord rec{step, total * inv_b, cls * inv_b, reg * inv_b, lr};
      curve.push_back(rec);
      if (progress) progress(rec);
    }
  }
  return curve;
}

#define TRAJCAST_INSTANTIATE_OBJECTIVE(T)                                   \
  template std::vector<int64_t> closest_mode<T>(const Array<T>&,            \
                                                const Array<T>&);           \
  template LossOut<T> wta_loss<T>(const MixtureOut<T>&, const Array<T>&);   \
  template class AdamW<T>;                                                  \
  template std::vector<LossRecord> train_model<T>(                          \
      Model<T>&, const std::vector<SceneTensors>&, const TrainConfig&,      \
      const ProgressFn&);

TRAJCAST_INSTANTIATE_OBJECTIVE(float)
TRAJCAST_INSTANTIATE_OBJECTIVE(double)

#undef TRAJCAST_INSTANTIATE_OBJECTIVE

}  // namespace trajcast
