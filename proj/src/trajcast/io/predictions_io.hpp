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

#ifndef TRAJCAST_IO_PREDICTIONS_IO_HPP_
#define TRAJCAST_IO_PREDICTIONS_IO_HPP_

#include <string>
#include <vector>

#include "trajcast/io/json_util.hpp"
#include "trajcast/metrics/metrics.hpp"

namespace trajcast {

// Prediction files are JSON Lines, one record per (scene, agent):
// mode count, probabilities, means [k, T_f, 2], and logstd [k, T_f, 2],
// all in the global scene frame.
Json prediction_to_json(const PredictionRecord& rec);
PredictionRecord prediction_from_json(const Json& j);

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& preds);
std::vector<PredictionRecord> read_predictions(const std::string& path);

}  // namespace trajcast

#endif  // TRAJCAST_IO_PREDICTIONS_IO_HPP_
