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

// Central finite-difference oracle for gradient checks. Test-only; it never
// calls into any backward implementation.

#ifndef TRAJCAST_TESTS_GRADCHECK_HPP_
#define TRAJCAST_TESTS_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "trajcast/core/array.hpp"

namespace trajcast::testing {

struct GradCheckResult {
  bool ok = true;
  double worst_rel = 0.0;
  std::string detail;
};

// Compares an analytic gradient against central finite differences of a
// scalar-valued function of one flat input vector.
//
// rel error per element: |fd - an| / max(1, |fd|, |an|), so near-zero
// gradients are compared absolutely.
inline GradCheckResult check_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const std::vector<double>& analytic,
    double step = 1e-5, double rel_tol = 1e-4) {
  GradCheckResult res;
  std::vector<double> x = x0;
  for (size_t i = 0; i < x0.size(); ++i) {
    x[i] = x0[i] + step;
    const double fp = f(x);
    x[i] = x0[i] - step;
    const double fm = f(x);
    x[i] = x0[i];
    const double fd = (fp - fm) / (2.0 * step);
    const double an = analytic[i];
    const double denom = std::max({1.0, std::abs(fd), std::abs(an)});
    const double rel = std::abs(fd - an) / denom;
    if (rel > res.worst_rel) {
      res.worst_rel = rel;
      res.detail = "element " + std::to_string(i) + ": fd=" +
                   std::to_string(fd) + " analytic=" + std::to_string(an);
    }
  }
  res.ok = res.worst_rel <= rel_tol;
  return res;
}

}  // namespace trajcast::testing

#endif  // TRAJCAST_TESTS_GRADCHECK_HPP_
