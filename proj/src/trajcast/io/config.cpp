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

#include "trajcast/io/config.hpp"

#include <fstream>
#include <sstream>

namespace trajcast {

void BenchConfig::validate() const {
  if (fusions.empty() || regimes.empty() || ratios.empty()) {
    throw UsageError("bench: fusions, regimes, and ratios must be non-empty");
  }
  for (const auto& f : fusions) fusion_from_name(f);
  for (const auto& r : regimes) regime_from_name(r);
  for (double r : ratios) {
    if (r < 0 || r > 4) throw UsageError("bench: ratio outside [0, 4]");
  }
  if (forward_passes < 1) throw UsageError("bench: forward_passes >= 1");
  if (train_steps < 0 || train_scenes < 1 || eval_scenes < 1) {
    throw UsageError("bench: bad training/eval sizes");
  }
}

void RunConfig::validate() const {
  if (precision != "f32" && precision != "f64") {
    throw UsageError("precision must be f32 or f64");
  }
  if (scenes_count < 1) throw UsageError("scenes_count must be >= 1");
  model.validate();
  data.validate();
  train.validate();
  aggregation.validate();
  metrics.validate();
  bench.validate();
  if (model.dims.t_history != data.history_steps ||
      model.dims.s_interactions != data.caps.context_agents ||
      model.dims.s_roadgraph != data.caps.road_segments ||
      model.dims.s_lights != data.caps.traffic_lights ||
      model.future_steps != data.future_steps) {
    throw UsageError("model scene extents must mirror the data section");
  }
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.model.encoder.fusion = FusionKind::kEarly;
  cfg.model.encoder.regime = AttnRegime::kMultiAxis;
  cfg.model.encoder.depth = 2;
  cfg.model.encoder.block.hidden = 64;
  cfg.model.encoder.block.heads = 2;
  cfg.model.encoder.block.intermediate = 128;
  cfg.model.modes = 6;
  cfg.model.future_steps = cfg.data.future_steps;
  cfg.model.dims.t_history = cfg.data.history_steps;
  cfg.model.dims.s_interactions = cfg.data.caps.context_agents;
  cfg.model.dims.s_roadgraph = cfg.data.caps.road_segments;
  cfg.model.dims.s_lights = cfg.data.caps.traffic_lights;
  return cfg;
}

namespace {

Json optional_i64(const std::optional<int64_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}
Json optional_f64(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
void read_optional(const Json& j, const char* key, std::optional<T>* out) {
  if (j.contains(key) && !j.at(key).is_null()) {
    *out = j.at(key).get<T>();
  } else {
    out->reset();
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

Json config_to_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const auto& e = m.encoder;
  Json jm{{"fusion", fusion_name(e.fusion)},
          {"regime", regime_name(e.regime)},
          {"depth", e.depth},
          {"hidden", e.block.hidden},
          {"heads", e.block.heads},
          {"intermediate", e.block.intermediate},
          {"dropout", e.block.dropout},
          {"latent_ratio", optional_f64(e.latent_ratio)},
          {"latent_time", optional_i64(e.latent_time)},
          {"latent_space", optional_i64(e.latent_space)},
          {"decoder_depth", m.decoder_depth},
          {"decoder_hidden", m.decoder_hidden},
          {"decoder_intermediate", m.decoder_intermediate},
          {"decoder_heads", m.decoder_heads},
          {"modes", m.modes},
          {"ensemble_decoders", m.ensemble_decoders},
          {"logstd_clamp", m.logstd_clamp}};

  const auto& d = cfg.data;
  Json jd{{"seed", d.seed},
          {"agents", d.agents},
          {"background_agents", d.background_agents},
          {"history_steps", d.history_steps},
          {"future_steps", d.future_steps},
          {"context_agents", d.caps.context_agents},
          {"roadgraph_segments", d.caps.road_segments},
          {"traffic_lights", d.caps.traffic_lights},
          {"dt", d.dt},
          {"scenario_weights", d.scenario_weights},
          {"noise_position", d.noise_position},
          {"noise_speed", d.noise_speed},
          {"bimodal", d.bimodal}};

  const auto& t = cfg.train;
  Json jt{{"steps", t.steps},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"dropout", t.dropout},
          {"seed", t.seed},
          {"log_every", t.log_every}};

  const auto& a = cfg.aggregation;
  Json ja{{"distance_threshold", a.distance_threshold},
          {"refine_iterations", a.refine_iterations},
          {"max_trajectories", a.max_trajectories}};

  const auto& me = cfg.metrics;
  Json thresholds = Json::array();
  for (const auto& h : me.miss_thresholds) {
    thresholds.push_back({{"step", h.step}, {"threshold", h.threshold}});
  }
  Json jme{{"top_k", me.top_k},
           {"miss_thresholds", thresholds},
           {"map_threshold", me.map_threshold},
           {"overlap_radius", me.overlap_radius},
           {"bucket_stationary_displacement",
            me.bucket_stationary_displacement},
           {"bucket_turn_angle", me.bucket_turn_angle}};

  const auto& b = cfg.bench;
  Json jb{{"fusions", b.fusions},
          {"regimes", b.regimes},
          {"ratios", b.ratios},
          {"forward_passes", b.forward_passes},
          {"train_steps", b.train_steps},
          {"train_scenes", b.train_scenes},
          {"eval_scenes", b.eval_scenes}};

  return Json{{"precision", cfg.precision},
              {"scenes_count", cfg.scenes_count},
              {"model", jm},
              {"data", jd},
              {"train", jt},
              {"aggregation", ja},
              {"metrics", jme},
              {"bench", jb}};
}

RunConfig config_from_json(const Json& j) {
  RunConfig cfg = default_config();
  try {
    read_field(j, "precision", &cfg.precision);
    read_field(j, "scenes_count", &cfg.scenes_count);

    if (j.contains("model")) {
      const Json& jm = j.at("model");
      auto& e = cfg.model.encoder;
      if (jm.contains("fusion"))
        e.fusion = fusion_from_name(jm.at("fusion").get<std::string>());
      if (jm.contains("regime"))
        e.regime = regime_from_name(jm.at("regime").get<std::string>());
      read_field(jm, "depth", &e.depth);
      read_field(jm, "hidden", &e.block.hidden);
      read_field(jm, "heads", &e.block.heads);
      read_field(jm, "intermediate", &e.block.intermediate);
      read_field(jm, "dropout", &e.block.dropout);
      read_optional(jm, "latent_ratio", &e.latent_ratio);
      read_optional(jm, "latent_time", &e.latent_time);
      read_optional(jm, "latent_space", &e.latent_space);
      read_field(jm, "decoder_depth", &cfg.model.decoder_depth);
      read_field(jm, "decoder_hidden", &cfg.model.decoder_hidden);
      read_field(jm, "decoder_intermediate", &cfg.model.decoder_intermediate);
      read_field(jm, "decoder_heads", &cfg.model.decoder_heads);
      read_field(jm, "modes", &cfg.model.modes);
      read_field(jm, "ensemble_decoders", &cfg.model.ensemble_decoders);
      read_field(jm, "logstd_clamp", &cfg.model.logstd_clamp);
    }

    if (j.contains("data")) {
      const Json& jd = j.at("data");
      auto& d = cfg.data;
      read_field(jd, "seed", &d.seed);
      read_field(jd, "agents", &d.agents);
      read_field(jd, "background_agents", &d.background_agents);
      read_field(jd, "history_steps", &d.history_steps);
      read_field(jd, "future_steps", &d.future_steps);
      read_field(jd, "context_agents", &d.caps.context_agents);
      read_field(jd, "roadgraph_segments", &d.caps.road_segments);
      read_field(jd, "traffic_lights", &d.caps.traffic_lights);
      read_field(jd, "dt", &d.dt);
      if (jd.contains("scenario_weights")) {
        d.scenario_weights =
            jd.at("scenario_weights").get<std::map<std::string, double>>();
      }
      read_field(jd, "noise_position", &d.noise_position);
      read_field(jd, "noise_speed", &d.noise_speed);
      read_field(jd, "bimodal", &d.bimodal);
    }

    if (j.contains("train")) {
      const Json& jt = j.at("train");
      auto& t = cfg.train;
      read_field(jt, "steps", &t.steps);
      read_field(jt, "batch_size", &t.batch_size);
      read_field(jt, "learning_rate", &t.learning_rate);
      read_field(jt, "weight_decay", &t.weight_decay);
      read_field(jt, "beta1", &t.beta1);
      read_field(jt, "beta2", &t.beta2);
      read_field(jt, "epsilon", &t.epsilon);
      read_field(jt, "dropout", &t.dropout);
      read_field(jt, "seed", &t.seed);
      read_field(jt, "log_every", &t.log_every);
    }

    if (j.contains("aggregation")) {
      const Json& ja = j.at("aggregation");
      read_field(ja, "distance_threshold",
                 &cfg.aggregation.distance_threshold);
      read_field(ja, "refine_iterations", &cfg.aggregation.refine_iterations);
      read_field(ja, "max_trajectories", &cfg.aggregation.max_trajectories);
    }

    if (j.contains("metrics")) {
      const Json& jme = j.at("metrics");
      auto& me = cfg.metrics;
      read_field(jme, "top_k", &me.top_k);
      if (jme.contains("miss_thresholds")) {
        me.miss_thresholds.clear();
        for (const auto& h : jme.at("miss_thresholds")) {
          me.miss_thresholds.push_back({h.at("step").get<int64_t>(),
                                        h.at("threshold").get<double>()});
        }
      }
      read_field(jme, "map_threshold", &me.map_threshold);
      read_field(jme, "overlap_radius", &me.overlap_radius);
      read_field(jme, "bucket_stationary_displacement",
                 &me.bucket_stationary_displacement);
      read_field(jme, "bucket_turn_angle", &me.bucket_turn_angle);
    }

    if (j.contains("bench")) {
      const Json& jb = j.at("bench");
      auto& b = cfg.bench;
      read_field(jb, "fusions", &b.fusions);
      read_field(jb, "regimes", &b.regimes);
      read_field(jb, "ratios", &b.ratios);
      read_field(jb, "forward_passes", &b.forward_passes);
      read_field(jb, "train_steps", &b.train_steps);
      read_field(jb, "train_scenes", &b.train_scenes);
      read_field(jb, "eval_scenes", &b.eval_scenes);
    }
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }

  // The model's scene extents always mirror the data section.
  cfg.model.dims.t_history = cfg.data.history_steps;
  cfg.model.dims.s_interactions = cfg.data.caps.context_agents;
  cfg.model.dims.s_roadgraph = cfg.data.caps.road_segments;
  cfg.model.dims.s_lights = cfg.data.caps.traffic_lights;
  cfg.model.future_steps = cfg.data.future_steps;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw UsageError("malformed JSON config: " + path);
  return config_from_json(j);
}

void save_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config file: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
}

namespace {

std::string fnv1a_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(config_to_json(cfg).dump());
}

std::string model_signature(const RunConfig& cfg) {
  Json full = config_to_json(cfg);
  Json sig{{"precision", cfg.precision},
           {"model", full.at("model")},
           {"extents",
            {{"history_steps", cfg.data.history_steps},
             {"future_steps", cfg.data.future_steps},
             {"context_agents", cfg.data.caps.context_agents},
             {"roadgraph_segments", cfg.data.caps.road_segments},
             {"traffic_lights", cfg.data.caps.traffic_lights}}}};
  return fnv1a_hex(sig.dump());
}

}  // namespace trajcast
