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

#ifndef TRAJCAST_SCENE_FRAME_HPP_
#define TRAJCAST_SCENE_FRAME_HPP_

#include "trajcast/scene/scene_types.hpp"

namespace trajcast {

// Rigidly transforms the whole scene into the ego agent's frame: the ego
// current position maps to the origin, its heading to zero, positions are
// rotated by R(-heading) after translation, velocity and acceleration
// vectors are rotated, scalars are unchanged. Raises DataError when the
// ego agent's current state is invalid.
RawScene to_ego_frame(const RawScene& scene, int ego_index);

double wrap_angle(double a);

}  // namespace trajcast

#endif  // TRAJCAST_SCENE_FRAME_HPP_
