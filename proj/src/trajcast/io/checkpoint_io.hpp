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

#ifndef TRAJCAST_IO_CHECKPOINT_IO_HPP_
#define TRAJCAST_IO_CHECKPOINT_IO_HPP_

#include <string>

#include "trajcast/model/params.hpp"

namespace trajcast {

struct CheckpointMeta {
  std::string model_signature;
  std::string precision;
};

// Checkpoints are JSON: every parameter with name and shape, plus the
// model signature of the producing config. Values round-trip exactly
// (shortest-round-trip decimal for doubles; floats are stored as their
// exact double values).
template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& params,
                     const CheckpointMeta& meta);

// Fills an empty store; returns the stored metadata.
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path,
                               ParamStore<T>& params);

// Reads only the metadata (to pick the precision before loading).
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace trajcast

#endif  // TRAJCAST_IO_CHECKPOINT_IO_HPP_
