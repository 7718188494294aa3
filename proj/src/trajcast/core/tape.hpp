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

#ifndef TRAJCAST_CORE_TAPE_HPP_
#define TRAJCAST_CORE_TAPE_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trajcast/core/array.hpp"
#include "trajcast/core/error.hpp"

namespace trajcast {

template <typename T>
class Tape;

// Handle to a node on a tape. Cheap to copy; values live on the tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Array<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return tape->value(id).shape(); }
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode differentiation tape. Nodes are appended in forward order,
// so reversed insertion order is a reverse topological order of the DAG.
// Every forward result is checked for finiteness; the first non-finite
// value aborts with the producing op named.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Var<T> leaf(Array<T> value, bool requires_grad = true) {
    return push("leaf", std::move(value), {}, nullptr, requires_grad);
  }

  Var<T> constant(Array<T> value) {
    return push("const", std::move(value), {}, nullptr, false);
  }

  // Records an op result. `parents` must already be on this tape.
  Var<T> record(const char* op, Array<T> value, std::vector<int> parents,
                BackwardFn fn) {
    for (T v : value.data()) {
      if (!std::isfinite(static_cast<double>(v))) {
        throw NumericError(std::string("non-finite value produced by op '") +
                           op + "'");
      }
    }
    bool needs = false;
    int next = static_cast<int>(nodes_.size());
    for (int p : parents) {
      if (p < 0 || p >= next) {
        throw Error(std::string("tape op '") + op +
                    "' references a node that is not an ancestor (cyclic or "
                    "foreign parent)");
      }
      needs = needs || nodes_[static_cast<size_t>(p)].needs_grad;
    }
    return push(op, std::move(value), std::move(parents),
                needs ? std::move(fn) : nullptr, needs);
  }

  const Array<T>& value(int id) const {
    return nodes_[static_cast<size_t>(id)].value;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  // Runs the backward pass from a scalar loss. Visits nodes in reverse
  // insertion order exactly once; grads of unreachable nodes stay zero.
  void backward(const Var<T>& loss) {
    if (loss.tape != this) throw Error("loss recorded on a different tape");
    const Array<T>& lv = value(loss.id);
    if (lv.size() != 1) {
      throw ShapeError("backward requires a scalar loss, got shape " +
                       shape_str(lv.shape()));
    }
    grads_.assign(nodes_.size(), Array<T>());
    grads_[static_cast<size_t>(loss.id)] = Array<T>::full(lv.shape(), T(1));
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (!n.needs_grad || !n.backward) continue;
      if (grads_[static_cast<size_t>(id)].size() == 0) continue;
      n.backward(*this, id);
    }
    ran_backward_ = true;
  }

  // Gradient of a node from the last backward pass; zeros if untouched.
  const Array<T>& grad(int id) {
    if (!ran_backward_) throw Error("grad() before backward()");
    Array<T>& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) g = Array<T>(value(id).shape());
    return g;
  }
  const Array<T>& grad(const Var<T>& v) { return grad(v.id); }

  // Accumulates a gradient contribution into a parent during backward.
  void accum(int id, const Array<T>& contribution) {
    Array<T>& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) {
      g = contribution;
      return;
    }
    T* gp = g.ptr();
    const T* cp = contribution.ptr();
    const int64_t n = g.size();
    for (int64_t i = 0; i < n; ++i) gp[i] += cp[i];
  }

  // Mutable gradient buffer for in-place accumulation by backward fns.
  Array<T>& grad_buffer(int id) {
    Array<T>& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) g = Array<T>(value(id).shape());
    return g;
  }

  bool needs_grad(int id) const {
    return nodes_[static_cast<size_t>(id)].needs_grad;
  }

 private:
  struct Node {
    const char* op;
    Array<T> value;
    std::vector<int> parents;
    BackwardFn backward;
    bool needs_grad;
  };

  Var<T> push(const char* op, Array<T> value, std::vector<int> parents,
              BackwardFn fn, bool needs_grad) {
    nodes_.push_back(Node{op, std::move(value), std::move(parents),
                          std::move(fn), needs_grad});
    return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
  std::vector<Array<T>> grads_;
  bool ran_backward_ = false;
};

}  // namespace trajcast

#endif  // TRAJCAST_CORE_TAPE_HPP_
