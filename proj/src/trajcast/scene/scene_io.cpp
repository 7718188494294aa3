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

#include "trajcast/scene/scene_io.hpp"

#include <fstream>

#include "trajcast/core/error.hpp"

namespace trajcast {

namespace {

Json modality_to_json(const ModalityTensor& m) {
  return Json{{"values", array_to_json(m.values)},
              {"mask", mask_to_json(m.mask)}};
}

ModalityTensor modality_from_json(const Json& j) {
  ModalityTensor m;
  m.values = array_from_json(j.at("values"));
  m.mask = mask_from_json(j.at("mask"));
  if (m.values.rank() != 4 || m.mask.rank() != 3 ||
      m.values.dim(0) != m.mask.dim(0) || m.values.dim(1) != m.mask.dim(1) ||
      m.values.dim(2) != m.mask.dim(2)) {
    throw DataError("modality tensor and mask shapes are inconsistent");
  }
  return m;
}

}  // namespace

Json scene_to_json(const SceneTensors& scene) {
  Json j{{"id", scene.scene_id},
         {"ego_index", scene.ego_index},
         {"history", modality_to_json(scene.history)},
         {"interactions", modality_to_json(scene.interactions)},
         {"roadgraph", modality_to_json(scene.roadgraph)},
         {"traffic_lights", modality_to_json(scene.traffic_lights)},
         {"poses", array_to_json(scene.poses)},
         {"future", array_to_json(scene.future)}};
  if (!scene.scenario.empty()) j["scenario"] = scene.scenario;
  if (scene.branch_taken >= 0) {
    j["branch"] = Json{{"taken", scene.branch_taken},
                       {"endpoints", array_to_json(scene.branch_endpoints)}};
  }
  return j;
}

SceneTensors scene_from_json(const Json& j) {
  SceneTensors s;
  try {
    s.scene_id = j.at("id").get<int64_t>();
    s.ego_index = j.at("ego_index").get<int>();
    s.history = modality_from_json(j.at("history"));
    s.interactions = modality_from_json(j.at("interactions"));
    s.roadgraph = modality_from_json(j.at("roadgraph"));
    s.traffic_lights = modality_from_json(j.at("traffic_lights"));
    s.poses = array_from_json(j.at("poses"));
    s.future = array_from_json(j.at("future"));
    if (j.contains("scenario"))
      s.scenario = j.at("scenario").get<std::vector<std::string>>();
    if (j.contains("branch")) {
      s.branch_taken = j.at("branch").at("taken").get<int>();
      s.branch_endpoints = array_from_json(j.at("branch").at("endpoints"));
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad scene record: ") + e.what());
  }
  const int64_t a = s.history.values.dim(0);
  if (s.interactions.values.dim(0) != a || s.roadgraph.values.dim(0) != a ||
      s.traffic_lights.values.dim(0) != a || s.poses.dim(0) != a ||
      s.future.dim(0) != a) {
    throw DataError("scene record: agent counts differ across modalities");
  }
  if (s.roadgraph.values.dim(1) != 1) {
    throw DataError("scene record: roadgraph must have time length 1");
  }
  return s;
}

void write_scenes(const std::string& path,
                  const std::vector<SceneTensors>& scenes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& s : scenes) out << scene_to_json(s).dump() << "\n";
  if (!out) throw DataError("failed writing scenes to " + path);
}

std::vector<SceneTensors> read_scenes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene file: " + path);
  std::vector<SceneTensors> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    scenes.push_back(scene_from_json(parse_json_line(line, "scene file")));
  }
  if (scenes.empty()) throw DataError("scene file is empty: " + path);
  return scenes;
}

}  // namespace trajcast
