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

#include "trajcast/io/checkpoint_io.hpp"

#include <fstream>
#include <sstream>

#include "trajcast/io/json_util.hpp"

namespace trajcast {

namespace {

constexpr const char* kFormat = "trajcast-checkpoint-v1";

Json read_checkpoint_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw DataError("malformed checkpoint: " + path);
  if (!j.contains("format") || j.at("format") != kFormat) {
    throw DataError("not a trajcast checkpoint: " + path);
  }
  return j;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& params,
                     const CheckpointMeta& meta) {
  Json arr = Json::array();
  for (const auto& [name, value] : params) {
    std::vector<double> data(value.data().begin(), value.data().end());
    arr.push_back(Json{{"name", name},
                       {"shape", value.shape()},
                       {"values", std::move(data)}});
  }
  Json j{{"format", kFormat},
         {"model_signature", meta.model_signature},
         {"precision", meta.precision},
         {"params", std::move(arr)}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

template <typename T>
CheckpointMeta load_checkpoint(const std::string& path,
                               ParamStore<T>& params) {
  if (params.count() != 0) {
    throw Error("load_checkpoint: store must be empty");
  }
  Json j = read_checkpoint_json(path);
  CheckpointMeta meta;
  try {
    meta.model_signature = j.at("model_signature").get<std::string>();
    meta.precision = j.at("precision").get<std::string>();
    for (const auto& p : j.at("params")) {
      const auto name = p.at("name").get<std::string>();
      Shape shape = p.at("shape").get<Shape>();
      auto values = p.at("values").get<std::vector<double>>();
      Array<T>& arr = params.create(name, shape);
      if (static_cast<int64_t>(values.size()) != arr.size()) {
        throw DataError("checkpoint: parameter " + name +
                        " has inconsistent shape");
      }
      for (int64_t i = 0; i < arr.size(); ++i) {
        arr[i] = static_cast<T>(values[static_cast<size_t>(i)]);
      }
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
  return meta;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  Json j = read_checkpoint_json(path);
  try {
    return {j.at("model_signature").get<std::string>(),
            j.at("precision").get<std::string>()};
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
}

template void save_checkpoint<float>(const std::string&,
                                     const ParamStore<float>&,
                                     const CheckpointMeta&);
template void save_checkpoint<double>(const std::string&,
                                      const ParamStore<double>&,
                                      const CheckpointMeta&);
template CheckpointMeta load_checkpoint<float>(const std::string&,
                                               ParamStore<float>&);
template CheckpointMeta load_checkpoint<double>(const std::string&,
                                                ParamStore<double>&);

}  // namespace trajcast
