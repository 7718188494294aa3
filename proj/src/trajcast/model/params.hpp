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

#ifndef TRAJCAST_MODEL_PARAMS_HPP_
#define TRAJCAST_MODEL_PARAMS_HPP_

#include <map>
#include <string>
#include <vector>

#include "trajcast/core/array.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/core/tape.hpp"

namespace trajcast {

// Named trainable arrays. Iteration is name-sorted everywhere, which fixes
// leaf order on the tape and optimizer update order, so training is
// deterministic for a given seed.
template <typename T>
class ParamStore {
 public:
  Array<T>& create(const std::string& name, Shape shape) {
    auto [it, inserted] = params_.emplace(name, Array<T>(std::move(shape)));
    if (!inserted) throw Error("duplicate parameter: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  const Array<T>& get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw Error("unknown parameter: " + name);
    return it->second;
  }

  Array<T>& mutable_get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw Error("unknown parameter: " + name);
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [k, v] : params_) out.push_back(k);
    return out;
  }

  int64_t total_parameters() const {
    int64_t n = 0;
    for (const auto& [k, v] : params_) n += v.size();
    return n;
  }

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  size_t count() const { return params_.size(); }

 private:
  std::map<std::string, Array<T>> params_;
};

// Tape leaves for every parameter of a store, in name-sorted order.
template <typename T>
struct ParamBinding {
  Tape<T>* tape = nullptr;
  std::map<std::string, Var<T>> vars;

  Var<T> at(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw Error("unbound parameter: " + name);
    return it->second;
  }
};

template <typename T>
ParamBinding<T> bind_params(Tape<T>& tape, const ParamStore<T>& store) {
  ParamBinding<T> b;
  b.tape = &tape;
  for (const auto& [name, value] : store) {
    b.vars.emplace(name, tape.leaf(value, true));
  }
  return b;
}

template <typename T>
void init_xavier(Array<T>& w, Rng& rng) {
  const int64_t fan_out = w.dim(0);
  const int64_t fan_in = w.rank() > 1 ? w.size() / fan_out : fan_out;
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
  for (int64_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<T>(rng.normal() * std);
}

template <typename T>
void init_normal(Array<T>& w, Rng& rng, double std) {
  for (int64_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<T>(rng.normal() * std);
}

template <typename T>
void init_fill(Array<T>& w, double value) {
  for (int64_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(value);
}

}  // namespace trajcast

#endif  // TRAJCAST_MODEL_PARAMS_HPP_
