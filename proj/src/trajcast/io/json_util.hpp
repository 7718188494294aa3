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

#ifndef TRAJCAST_IO_JSON_UTIL_HPP_
#define TRAJCAST_IO_JSON_UTIL_HPP_

#include <string>

#include <json.hpp>

#include "trajcast/core/array.hpp"
#include "trajcast/core/error.hpp"

namespace trajcast {

using Json = nlohmann::json;

// Arrays serialize shape-explicit with row-major flat values.
inline Json array_to_json(const Array<double>& a) {
  return Json{{"shape", a.shape()}, {"values", a.data()}};
}

inline Json mask_to_json(const Mask& m) {
  std::vector<int> vals(m.data().begin(), m.data().end());
  return Json{{"shape", m.shape()}, {"values", vals}};
}

inline Array<double> array_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("values")) {
    throw DataError("expected {shape, values} array object");
  }
  Shape shape = j.at("shape").get<Shape>();
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  return Array<double>(std::move(shape), std::move(values));
}

inline Mask mask_from_json(const Json& j) {
  Shape shape = j.at("shape").get<Shape>();
  std::vector<int> vals = j.at("values").get<std::vector<int>>();
  std::vector<uint8_t> bytes(vals.begin(), vals.end());
  return Mask(std::move(shape), std::move(bytes));
}

inline Json parse_json_line(const std::string& line, const char* what) {
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    throw DataError(std::string("malformed JSON in ") + what);
  }
  return j;
}

}  // namespace trajcast

#endif  // TRAJCAST_IO_JSON_UTIL_HPP_
