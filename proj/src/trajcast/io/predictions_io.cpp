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

#include "trajcast/io/predictions_io.hpp"

#include <fstream>

namespace trajcast {

Json prediction_to_json(const PredictionRecord& rec) {
  Json j{{"scene", rec.scene_id},
         {"agent", rec.agent},
         {"k", rec.modes.modes()},
         {"probabilities", rec.modes.probs},
         {"means", array_to_json(rec.modes.trajectories)}};
  if (rec.modes.logstd.size() > 0) {
    j["logstd"] = array_to_json(rec.modes.logstd);
  }
  return j;
}

PredictionRecord prediction_from_json(const Json& j) {
  PredictionRecord rec;
  try {
    rec.scene_id = j.at("scene").get<int64_t>();
    rec.agent = j.at("agent").get<int64_t>();
    rec.modes.probs = j.at("probabilities").get<std::vector<double>>();
    rec.modes.trajectories = array_from_json(j.at("means"));
    if (j.contains("logstd")) {
      rec.modes.logstd = array_from_json(j.at("logstd"));
    }
    const auto k = j.at("k").get<int64_t>();
    if (k != rec.modes.modes()) {
      throw DataError("prediction record: k does not match probabilities");
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad prediction record: ") + e.what());
  }
  rec.modes.validate();
  return rec;
}

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& preds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& p : preds) out << prediction_to_json(p).dump() << "\n";
  if (!out) throw DataError("failed writing predictions to " + path);
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prediction file: " + path);
  std::vector<PredictionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(prediction_from_json(parse_json_line(line,
                                                       "prediction file")));
  }
  if (out.empty()) throw DataError("prediction file is empty: " + path);
  return out;
}

}  // namespace trajcast
