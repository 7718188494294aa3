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

#include "trajcast/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "trajcast/io/checkpoint_io.hpp"
#include "trajcast/scene/frame.hpp"

namespace trajcast::pipeline {

AnyModel init_model(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.precision == "f32") {
    auto m = std::make_unique<Model<float>>(cfg.model);
    m->init(cfg.train.seed);
    return AnyModel(cfg, std::move(m), nullptr);
  }
  auto m = std::make_unique<Model<double>>(cfg.model);
  m->init(cfg.train.seed);
  return AnyModel(cfg, nullptr, std::move(m));
}

std::vector<SceneTensors> generate(const RunConfig& cfg, int64_t n_scenes) {
  return generate_scenes(cfg.data, n_scenes);
}

std::vector<LossRecord> train(AnyModel& model,
                              const std::vector<SceneTensors>& scenes,
                              const ProgressFn& progress) {
  const TrainConfig& tc = model.config().train;
  if (model.is_f32()) return train_model(model.f32(), scenes, tc, progress);
  return train_model(model.f64(), scenes, tc, progress);
}

namespace {

template <typename T>
std::vector<PredictionRecord> predict_impl(
    const Model<T>& model, const std::vector<SceneTensors>& scenes) {
  std::vector<PredictionRecord> out;
  const int64_t k = model.config().modes;
  const int64_t tf = model.config().future_steps;
  for (const SceneTensors& scene : scenes) {
    Tape<T> tape;
    // Forward only; parameters do not need gradients here.
    ParamBinding<T> binding;
    binding.tape = &tape;
    for (const auto& [name, value] : model.params()) {
      binding.vars.emplace(name, tape.leaf(value, false));
    }
    auto mixtures = model.forward(tape, binding, scene);

    for (int64_t a = 0; a < scene.agents(); ++a) {
      std::vector<ModeSet> members;
      for (const auto& mix : mixtures) {
        ModeSet ms;
        ms.trajectories = Array<double>({k, tf, 2});
        ms.logstd = Array<double>({k, tf, 2});
        // softmax of the logits row
        const Array<T>& logits = mix.logits.value();
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t m = 0; m < k; ++m)
          mx = std::max(mx, static_cast<double>(logits.at(a, m)));
        double denom = 0;
        std::vector<double> e(static_cast<size_t>(k));
        for (int64_t m = 0; m < k; ++m) {
          e[static_cast<size_t>(m)] =
              std::exp(static_cast<double>(logits.at(a, m)) - mx);
          denom += e[static_cast<size_t>(m)];
        }
        for (int64_t m = 0; m < k; ++m)
          ms.probs.push_back(e[static_cast<size_t>(m)] / denom);

        const Array<T>& means = mix.means.value();
        const Array<T>& logstd = mix.logstd.value();
        std::vector<double> ego(static_cast<size_t>(tf * 2));
        std::vector<double> global(static_cast<size_t>(tf * 2));
        const double pose[3] = {scene.poses.at(a, 0), scene.poses.at(a, 1),
                                scene.poses.at(a, 2)};
        for (int64_t m = 0; m < k; ++m) {
          for (int64_t t = 0; t < tf; ++t) {
            ego[static_cast<size_t>(2 * t)] =
                static_cast<double>(means.at(a, m, t, 0));
            ego[static_cast<size_t>(2 * t + 1)] =
                static_cast<double>(means.at(a, m, t, 1));
          }
          ego_to_global(pose, ego.data(), global.data(), tf);
          for (int64_t t = 0; t < tf; ++t) {
            ms.trajectories.at(m, t, 0) = global[static_cast<size_t>(2 * t)];
            ms.trajectories.at(m, t, 1) =
                global[static_cast<size_t>(2 * t + 1)];
            ms.logstd.at(m, t, 0) = static_cast<double>(logstd.at(a, m, t, 0));
            ms.logstd.at(m, t, 1) = static_cast<double>(logstd.at(a, m, t, 1));
          }
        }
        members.push_back(std::move(ms));
      }
      PredictionRecord rec;
      rec.scene_id = scene.scene_id;
      rec.agent = a;
      rec.modes = members.size() == 1 ? std::move(members[0])
                                      : merge_ensemble(members);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

std::vector<PredictionRecord> predict(
    const AnyModel& model, const std::vector<SceneTensors>& scenes) {
  return model.is_f32() ? predict_impl(model.f32(), scenes)
                        : predict_impl(model.f64(), scenes);
}

std::vector<PredictionRecord> aggregate_records(
    const std::vector<PredictionRecord>& preds,
    const AggregationConfig& cfg) {
  cfg.validate();
  std::vector<PredictionRecord> out;
  out.reserve(preds.size());
  for (const auto& rec : preds) {
    PredictionRecord r = rec;
    if (r.modes.modes() >= cfg.max_trajectories) {
      r.modes = aggregate_to_k(rec.modes, cfg);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> merge_prediction_sets(
    const std::vector<std::vector<PredictionRecord>>& sets) {
  if (sets.empty()) throw DataError("merge: no prediction sets");
  if (sets.size() == 1) return sets[0];
  const size_t n = sets[0].size();
  for (const auto& s : sets) {
    if (s.size() != n) {
      throw DataError("merge: prediction sets cover different records");
    }
  }
  std::vector<PredictionRecord> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<ModeSet> members;
    for (const auto& s : sets) {
      if (s[i].scene_id != sets[0][i].scene_id ||
          s[i].agent != sets[0][i].agent) {
        throw DataError("merge: prediction sets are not aligned by "
                        "(scene, agent)");
      }
      members.push_back(s[i].modes);
    }
    PredictionRecord rec;
    rec.scene_id = sets[0][i].scene_id;
    rec.agent = sets[0][i].agent;
    rec.modes = merge_ensemble(members);
    out.push_back(std::move(rec));
  }
  return out;
}

void save_model(const AnyModel& model, const std::string& path) {
  CheckpointMeta meta{model_signature(model.config()),
                      model.config().precision};
  if (model.is_f32()) {
    save_checkpoint(path, model.f32().params(), meta);
  } else {
    save_checkpoint(path, model.f64().params(), meta);
  }
}

AnyModel load_model(const RunConfig& cfg, const std::string& path) {
  cfg.validate();
  const CheckpointMeta meta = read_checkpoint_meta(path);
  if (meta.precision != cfg.precision) {
    throw DataError("checkpoint precision " + meta.precision +
                    " does not match config precision " + cfg.precision);
  }
  if (meta.model_signature != model_signature(cfg)) {
    throw DataError("checkpoint was produced by a different model "
                    "configuration (signature mismatch)");
  }
  if (cfg.precision == "f32") {
    auto m = std::make_unique<Model<float>>(cfg.model);
    load_checkpoint(path, m->params());
    return AnyModel(cfg, std::move(m), nullptr);
  }
  auto m = std::make_unique<Model<double>>(cfg.model);
  load_checkpoint(path, m->params());
  return AnyModel(cfg, nullptr, std::move(m));
}

void write_loss_curve(const std::string& path,
                      const std::vector<LossRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write loss curve: " + path);
  out << "step,total,classification,regression,lr\n";
  out.precision(17);
  for (const auto& r : curve) {
    out << r.step << "," << r.total << "," << r.classification << ","
        << r.regression << "," << r.lr << "\n";
  }
}

namespace {

template <typename T>
double median_forward_ms(const Model<T>& model, const SceneTensors& scene,
                         int64_t passes) {
  std::vector<double> times;
  times.reserve(static_cast<size_t>(passes));
  for (int64_t i = 0; i < passes; ++i) {
    const auto start = std::chrono::steady_clock::now();
    Tape<T> tape;
    ParamBinding<T> binding;
    binding.tape = &tape;
    for (const auto& [name, value] : model.params()) {
      binding.vars.emplace(name, tape.leaf(value, false));
    }
    model.forward(tape, binding, scene);
    const auto end = std::chrono::steady_clock::now();
    times.push_back(
        std::chrono::duration<double, std::milli>(end - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

template <typename T>
int64_t instrumented_scores(const Model<T>& model, const SceneTensors& scene) {
  Tape<T> tape;
  ParamBinding<T> binding;
  binding.tape = &tape;
  for (const auto& [name, value] : model.params()) {
    binding.vars.emplace(name, tape.leaf(value, false));
  }
  ScoreCounter counter;
  ForwardOptions<T> opts;
  opts.counter = &counter;
  model.forward(tape, binding, scene, opts);
  return counter.scores;
}

}  // namespace

std::vector<BenchRow> bench(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  std::vector<BenchRow> rows;
  for (const std::string& fusion : cfg.bench.fusions) {
    for (const std::string& regime : cfg.bench.regimes) {
      for (double ratio : cfg.bench.ratios) {
        RunConfig rc = cfg;
        rc.model.encoder.fusion = fusion_from_name(fusion);
        rc.model.encoder.regime = regime_from_name(regime);
        rc.model.encoder.latent_ratio.reset();
        rc.model.encoder.latent_time.reset();
        rc.model.encoder.latent_space.reset();
        if (ratio > 0) rc.model.encoder.latent_ratio = ratio;

        BenchRow row;
        row.fusion = fusion;
        row.regime = regime;
        row.ratio = ratio;

        AnyModel model = init_model(rc);
        row.params = model.parameter_count();

        // One timing scene per config, generated deterministically.
        RunConfig gen = rc;
        gen.data.seed = rc.data.seed + 17;
        std::vector<SceneTensors> timing = generate(gen, 1);
        const int64_t agents = timing[0].agents();
        const int64_t planned =
            model.is_f32() ? model.f32().planned_scores_per_agent()
                           : model.f64().planned_scores_per_agent();
        row.attn_scores = planned * agents;
        const int64_t measured =
            model.is_f32() ? instrumented_scores(model.f32(), timing[0])
                           : instrumented_scores(model.f64(), timing[0]);
        if (measured != row.attn_scores) {
          throw NumericError("bench: instrumented score count " +
                             std::to_string(measured) +
                             " disagrees with the closed form " +
                             std::to_string(row.attn_scores));
        }
        row.forward_ms_median =
            model.is_f32()
                ? median_forward_ms(model.f32(), timing[0],
                                    cfg.bench.forward_passes)
                : median_forward_ms(model.f64(), timing[0],
                                    cfg.bench.forward_passes);

        if (cfg.bench.train_steps > 0) {
          RunConfig tc = rc;
          tc.train.steps = cfg.bench.train_steps;
          AnyModel trainee = init_model(tc);
          std::vector<SceneTensors> train_set =
              generate(tc, cfg.bench.train_scenes);
          train(trainee, train_set, progress);
          RunConfig ec = tc;
          ec.data.seed = tc.data.seed + 1;
          std::vector<SceneTensors> eval_set =
              generate(ec, cfg.bench.eval_scenes);
          auto preds = predict(trainee, eval_set);
          preds = aggregate_records(preds, tc.aggregation);
          MetricsReport rep =
              evaluate_predictions(preds, eval_set, tc.metrics);
          row.min_ade = rep.min_ade;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "fusion,regime,latent_ratio,params,attn_scores,forward_ms_median,"
        "min_ade\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.fusion << "," << r.regime << "," << r.ratio << "," << r.params
       << "," << r.attn_scores << "," << r.forward_ms_median << ",";
    if (r.min_ade >= 0) os << r.min_ade;
    os << "\n";
  }
  return os.str();
}

}  // namespace trajcast::pipeline
