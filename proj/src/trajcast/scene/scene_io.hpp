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

#ifndef TRAJCAST_SCENE_SCENE_IO_HPP_
#define TRAJCAST_SCENE_SCENE_IO_HPP_

#include <string>
#include <vector>

#include "trajcast/io/json_util.hpp"
#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

// Scene files are JSON Lines: one scene object per line with shape-explicit
// named arrays per modality, the ego index, and ground-truth futures.
// Round-trips are bit-exact.
Json scene_to_json(const SceneTensors& scene);
SceneTensors scene_from_json(const Json& j);

void write_scenes(const std::string& path,
                  const std::vector<SceneTensors>& scenes);
std::vector<SceneTensors> read_scenes(const std::string& path);

}  // namespace trajcast

#endif  // TRAJCAST_SCENE_SCENE_IO_HPP_
