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

#ifndef TRAJCAST_SCENE_FEATURES_HPP_
#define TRAJCAST_SCENE_FEATURES_HPP_

#include <vector>

#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

// Builds the model-ready per-agent tensors from a global-frame scene.
// For each modeled agent the whole scene is transformed into that agent's
// frame, then features are extracted with closest-first truncation at the
// caps and zero padding with mask false.
SceneTensors build_scene_tensors(const RawScene& scene,
                                 const std::vector<int>& modeled,
                                 const SceneCaps& caps, int64_t future_steps);

}  // namespace trajcast

#endif  // TRAJCAST_SCENE_FEATURES_HPP_
