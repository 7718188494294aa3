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

// trajcast command-line interface. Uses only the public C API.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "trajcast/trajcast.h"

namespace {

struct ConfigHandle {
  trajcast_config* ptr = nullptr;
  ~ConfigHandle() { trajcast_config_free(ptr); }
};
struct ScenesHandle {
  trajcast_scenes* ptr = nullptr;
  ~ScenesHandle() { trajcast_scenes_free(ptr); }
};
struct ModelHandle {
  trajcast_model* ptr = nullptr;
  ~ModelHandle() { trajcast_model_free(ptr); }
};
struct PredictionsHandle {
  trajcast_predictions* ptr = nullptr;
  ~PredictionsHandle() { trajcast_predictions_free(ptr); }
};

[[noreturn]] void fail(trajcast_code code) {
  std::cerr << "error: " << trajcast_last_error() << "\n";
  std::exit(static_cast<int>(code));
}

void check(trajcast_code code) {
  if (code != TRAJCAST_OK) fail(code);
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  trajcast_string_free(s);
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// Every command records a sidecar manifest next to its primary output so
// artifacts can be traced back to the exact configuration and seed.
struct ManifestWriter {
  std::string command;
  std::string config_hash;
  long long seed = -1;  // -1: seeds taken from the config file
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void write(const std::string& primary_output) const {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::ofstream out(primary_output + ".manifest.json");
    if (!out) return;
    out << "{\"command\":\"" << json_escape(command) << "\","
        << "\"config_hash\":\"" << json_escape(config_hash) << "\","
        << "\"seed\":" << seed << ","
        << "\"version\":\"" << json_escape(trajcast_version()) << "\","
        << "\"elapsed_seconds\":" << elapsed << ",\"outputs\":[";
    for (size_t i = 0; i < outputs.size(); ++i) {
      out << (i ? "," : "") << "\"" << json_escape(outputs[i]) << "\"";
    }
    out << "]}\n";
  }
};

ConfigHandle load_config_with_seed(const std::string& path,
                                   const long long* seed) {
  ConfigHandle cfg;
  check(trajcast_config_load(path.c_str(), &cfg.ptr));
  if (seed != nullptr && *seed >= 0) {
    check(trajcast_config_set_seed(cfg.ptr,
                                   static_cast<uint64_t>(*seed)));
  }
  return cfg;
}

std::string hash_of(const ConfigHandle& cfg) {
  char* h = nullptr;
  check(trajcast_config_hash(cfg.ptr, &h));
  return take_string(h);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajcast: attention-based motion forecasting at desk scale"};
  app.require_subcommand(1);

  std::string config_path, out_path, scenes_path, checkpoint_path;
  std::string predictions_path, pred_out_path, losses_path;
  std::vector<std::string> in_paths;
  long long seed = -1;
  long long count = -1;

  auto* gen = app.add_subcommand("generate", "Generate synthetic scenes");
  gen->add_option("--config", config_path, "Config file")->required();
  gen->add_option("--out", out_path, "Output scene JSONL")->required();
  gen->add_option("--count", count, "Number of scenes (default from config)");
  gen->add_option("--seed", seed, "Override data/train seeds");

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--scenes", scenes_path, "Training scenes")->required();
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--losses", losses_path, "Loss-curve CSV path");
  train->add_option("--seed", seed, "Override data/train seeds");

  auto* eval = app.add_subcommand(
      "eval", "Evaluate predictions (or a checkpoint) against scenes");
  eval->add_option("--config", config_path, "Config file")->required();
  eval->add_option("--scenes", scenes_path, "Evaluation scenes")->required();
  eval->add_option("--predictions", predictions_path,
                   "Existing prediction JSONL");
  eval->add_option("--checkpoint", checkpoint_path,
                   "Checkpoint to run inference with");
  eval->add_option("--pred-out", pred_out_path,
                   "Where to write predictions (checkpoint mode)");
  eval->add_option("--out", out_path, "Metrics CSV path");
  eval->add_option("--seed", seed, "Override data/train seeds");

  auto* agg = app.add_subcommand("aggregate",
                                 "Merge and aggregate prediction files");
  agg->add_option("--config", config_path, "Config file")->required();
  agg->add_option("--in", in_paths, "Input prediction JSONL file(s)")
      ->required();
  agg->add_option("--out", out_path, "Output prediction JSONL")->required();

  auto* bench = app.add_subcommand(
      "bench", "Sweep the fusion/regime/latent grid and report cost/quality");
  bench->add_option("--config", config_path, "Config file")->required();
  bench->add_option("--out", out_path, "Output CSV")->required();
  bench->add_option("--seed", seed, "Override data/train seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (gen->parsed()) {
    ConfigHandle cfg = load_config_with_seed(config_path, &seed);
    ManifestWriter mw{"generate", hash_of(cfg), seed, {out_path}};
    check(trajcast_generate(cfg.ptr, count, out_path.c_str()));
    mw.write(out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (train->parsed()) {
    ConfigHandle cfg = load_config_with_seed(config_path, &seed);
    ManifestWriter mw{"train", hash_of(cfg), seed, {out_path}};
    ScenesHandle scenes;
    check(trajcast_scenes_load(scenes_path.c_str(), &scenes.ptr));
    ModelHandle model;
    check(trajcast_train(cfg.ptr, scenes.ptr,
                         losses_path.empty() ? nullptr : losses_path.c_str(),
                         &model.ptr));
    check(trajcast_model_save(model.ptr, out_path.c_str()));
    if (!losses_path.empty()) mw.outputs.push_back(losses_path);
    mw.write(out_path);
    std::cout << "trained " << trajcast_scenes_count(scenes.ptr)
              << " scenes; " << trajcast_model_parameter_count(model.ptr)
              << " parameters; checkpoint " << out_path << "\n";
    return 0;
  }

  if (eval->parsed()) {
    ConfigHandle cfg = load_config_with_seed(config_path, &seed);
    ScenesHandle scenes;
    check(trajcast_scenes_load(scenes_path.c_str(), &scenes.ptr));

    PredictionsHandle preds;
    if (!predictions_path.empty()) {
      check(trajcast_predictions_load(predictions_path.c_str(), &preds.ptr));
    } else if (!checkpoint_path.empty()) {
      ModelHandle model;
      check(trajcast_model_load(cfg.ptr, checkpoint_path.c_str(),
                                &model.ptr));
      PredictionsHandle raw;
      check(trajcast_predict(model.ptr, scenes.ptr, &raw.ptr));
      check(trajcast_aggregate(raw.ptr, cfg.ptr, &preds.ptr));
      if (!pred_out_path.empty()) {
        check(trajcast_predictions_save(preds.ptr, pred_out_path.c_str()));
      }
    } else {
      std::cerr << "error: eval needs --predictions or --checkpoint\n";
      return 2;
    }

    char* text = nullptr;
    char* csv = nullptr;
    check(trajcast_evaluate(preds.ptr, scenes.ptr, cfg.ptr, &text, &csv));
    std::cout << take_string(text);
    const std::string csv_str = take_string(csv);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 3;
      }
      out << csv_str;
      ManifestWriter mw{"eval", hash_of(cfg), seed, {out_path}};
      if (!pred_out_path.empty()) mw.outputs.push_back(pred_out_path);
      mw.write(out_path);
    }
    return 0;
  }

  if (agg->parsed()) {
    ConfigHandle cfg = load_config_with_seed(config_path, nullptr);
    ManifestWriter mw{"aggregate", hash_of(cfg), -1, {out_path}};
    std::vector<PredictionsHandle> inputs(in_paths.size());
    std::vector<const trajcast_predictions*> raw;
    for (size_t i = 0; i < in_paths.size(); ++i) {
      check(trajcast_predictions_load(in_paths[i].c_str(), &inputs[i].ptr));
      raw.push_back(inputs[i].ptr);
    }
    PredictionsHandle merged;
    check(trajcast_predictions_merge(raw.data(),
                                     static_cast<int64_t>(raw.size()),
                                     &merged.ptr));
    PredictionsHandle reduced;
    check(trajcast_aggregate(merged.ptr, cfg.ptr, &reduced.ptr));
    check(trajcast_predictions_save(reduced.ptr, out_path.c_str()));
    mw.write(out_path);
    std::cout << "aggregated " << trajcast_predictions_count(reduced.ptr)
              << " records to " << out_path << "\n";
    return 0;
  }

  if (bench->parsed()) {
    ConfigHandle cfg = load_config_with_seed(config_path, &seed);
    ManifestWriter mw{"bench", hash_of(cfg), seed, {out_path}};
    check(trajcast_bench(cfg.ptr, out_path.c_str()));
    mw.write(out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  return 2;
}
