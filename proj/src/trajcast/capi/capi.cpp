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

#include "trajcast/trajcast.h"

#include <cstring>
#include <fstream>
#include <string>

#include "trajcast/io/predictions_io.hpp"
#include "trajcast/pipeline/pipeline.hpp"
#include "trajcast/scene/scene_io.hpp"
#include "trajcast/version.hpp"

using namespace trajcast;

struct trajcast_config {
  RunConfig cfg;
};
struct trajcast_scenes {
  std::vector<SceneTensors> scenes;
};
struct trajcast_model {
  AnyModel model;
};
struct trajcast_predictions {
  std::vector<PredictionRecord> preds;
};

namespace {

thread_local std::string g_last_error;

trajcast_code code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return TRAJCAST_ERR_USAGE;
  if (dynamic_cast<const DataError*>(&e)) return TRAJCAST_ERR_DATA;
  if (dynamic_cast<const NumericError*>(&e)) return TRAJCAST_ERR_NUMERIC;
  return TRAJCAST_ERR_NUMERIC;
}

template <typename Fn>
trajcast_code guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TRAJCAST_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return code_for(e);
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* trajcast_version(void) { return kVersionString; }

const char* trajcast_last_error(void) { return g_last_error.c_str(); }

void trajcast_string_free(char* s) { delete[] s; }

trajcast_code trajcast_config_default(trajcast_config** out) {
  return guarded([&] { *out = new trajcast_config{default_config()}; });
}

trajcast_code trajcast_config_load(const char* path, trajcast_config** out) {
  return guarded([&] { *out = new trajcast_config{load_config(path)}; });
}

trajcast_code trajcast_config_parse(const char* json_text,
                                    trajcast_config** out) {
  return guarded([&] {
    Json j = Json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw UsageError("malformed JSON config text");
    *out = new trajcast_config{config_from_json(j)};
  });
}

trajcast_code trajcast_config_dump(const trajcast_config* cfg,
                                   char** json_out) {
  return guarded(
      [&] { *json_out = dup_string(config_to_json(cfg->cfg).dump(2)); });
}

trajcast_code trajcast_config_hash(const trajcast_config* cfg,
                                   char** hash_out) {
  return guarded([&] { *hash_out = dup_string(config_hash(cfg->cfg)); });
}

trajcast_code trajcast_config_set_seed(trajcast_config* cfg, uint64_t seed) {
  return guarded([&] {
    cfg->cfg.data.seed = seed;
    cfg->cfg.train.seed = seed;
  });
}

void trajcast_config_free(trajcast_config* cfg) { delete cfg; }

trajcast_code trajcast_generate(const trajcast_config* cfg, int64_t n_scenes,
                                const char* out_path) {
  return guarded([&] {
    const int64_t n = n_scenes > 0 ? n_scenes : cfg->cfg.scenes_count;
    write_scenes(out_path, pipeline::generate(cfg->cfg, n));
  });
}

trajcast_code trajcast_scenes_load(const char* path, trajcast_scenes** out) {
  return guarded([&] { *out = new trajcast_scenes{read_scenes(path)}; });
}

int64_t trajcast_scenes_count(const trajcast_scenes* scenes) {
  return static_cast<int64_t>(scenes->scenes.size());
}

void trajcast_scenes_free(trajcast_scenes* scenes) { delete scenes; }

trajcast_code trajcast_train(const trajcast_config* cfg,
                             const trajcast_scenes* scenes,
                             const char* loss_csv_path, trajcast_model** out) {
  return guarded([&] {
    AnyModel model = pipeline::init_model(cfg->cfg);
    auto curve = pipeline::train(model, scenes->scenes);
    if (loss_csv_path != nullptr) {
      pipeline::write_loss_curve(loss_csv_path, curve);
    }
    *out = new trajcast_model{std::move(model)};
  });
}

trajcast_code trajcast_model_save(const trajcast_model* model,
                                  const char* path) {
  return guarded([&] { pipeline::save_model(model->model, path); });
}

trajcast_code trajcast_model_load(const trajcast_config* cfg,
                                  const char* path, trajcast_model** out) {
  return guarded([&] {
    *out = new trajcast_model{pipeline::load_model(cfg->cfg, path)};
  });
}

int64_t trajcast_model_parameter_count(const trajcast_model* model) {
  return model->model.parameter_count();
}

void trajcast_model_free(trajcast_model* model) { delete model; }

trajcast_code trajcast_predict(const trajcast_model* model,
                               const trajcast_scenes* scenes,
                               trajcast_predictions** out) {
  return guarded([&] {
    *out = new trajcast_predictions{
        pipeline::predict(model->model, scenes->scenes)};
  });
}

trajcast_code trajcast_predictions_load(const char* path,
                                        trajcast_predictions** out) {
  return guarded(
      [&] { *out = new trajcast_predictions{read_predictions(path)}; });
}

trajcast_code trajcast_predictions_save(const trajcast_predictions* preds,
                                        const char* path) {
  return guarded([&] { write_predictions(path, preds->preds); });
}

trajcast_code trajcast_predictions_merge(const trajcast_predictions* const* sets,
                                         int64_t n,
                                         trajcast_predictions** out) {
  return guarded([&] {
    std::vector<std::vector<PredictionRecord>> all;
    for (int64_t i = 0; i < n; ++i) all.push_back(sets[i]->preds);
    *out = new trajcast_predictions{pipeline::merge_prediction_sets(all)};
  });
}

trajcast_code trajcast_aggregate(const trajcast_predictions* preds,
                                 const trajcast_config* cfg,
                                 trajcast_predictions** out) {
  return guarded([&] {
    *out = new trajcast_predictions{
        pipeline::aggregate_records(preds->preds, cfg->cfg.aggregation)};
  });
}

int64_t trajcast_predictions_count(const trajcast_predictions* preds) {
  return static_cast<int64_t>(preds->preds.size());
}

void trajcast_predictions_free(trajcast_predictions* preds) { delete preds; }

trajcast_code trajcast_evaluate(const trajcast_predictions* preds,
                                const trajcast_scenes* scenes,
                                const trajcast_config* cfg,
                                char** report_text, char** report_csv) {
  return guarded([&] {
    MetricsReport rep = evaluate_predictions(preds->preds, scenes->scenes,
                                             cfg->cfg.metrics);
    if (report_text != nullptr) *report_text = dup_string(report_to_text(rep));
    if (report_csv != nullptr) *report_csv = dup_string(report_to_csv(rep));
  });
}

trajcast_code trajcast_bench(const trajcast_config* cfg,
                             const char* csv_path) {
  return guarded([&] {
    auto rows = pipeline::bench(cfg->cfg);
    std::ofstream out(csv_path);
    if (!out) throw DataError(std::string("cannot write bench CSV: ") +
                              csv_path);
    out << pipeline::bench_to_csv(rows);
  });
}

}  // extern "C"
