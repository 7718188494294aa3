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

#include "trajcast/aggregate/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "trajcast/core/error.hpp"

namespace trajcast {

void ModeSet::validate() const {
  const int64_t k = modes();
  if (k < 1) throw DataError("mode set: no modes");
  if (trajectories.rank() != 3 || trajectories.dim(0) != k ||
      trajectories.dim(2) != 2) {
    throw DataError("mode set: trajectories must be [k, T_f, 2]");
  }
  if (logstd.size() > 0 && logstd.shape() != trajectories.shape()) {
    throw DataError("mode set: logstd shape mismatch");
  }
  double sum = 0;
  for (double p : probs) {
    if (p < 0) throw DataError("mode set: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw DataError("mode set: probabilities sum to " + std::to_string(sum) +
                    ", expected 1");
  }
}

void AggregationConfig::validate() const {
  if (distance_threshold <= 0) {
    throw UsageError("aggregation: distance threshold must be positive");
  }
  if (refine_iterations < 0) {
    throw UsageError("aggregation: refine iterations must be >= 0");
  }
  if (max_trajectories < 1) {
    throw UsageError("aggregation: max trajectories must be >= 1");
  }
}

namespace {

double endpoint_distance(const Array<double>& a, int64_t i,
                         const Array<double>& b, int64_t j) {
  const int64_t t = a.dim(1) - 1;
  const double dx = a.at(i, t, 0) - b.at(j, t, 0);
  const double dy = a.at(i, t, 1) - b.at(j, t, 1);
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<int64_t> greedy_init(const ModeSet& modes, double threshold) {
  modes.validate();
  const int64_t k = modes.modes();
  std::vector<uint8_t> covered(static_cast<size_t>(k), 0);
  std::vector<int64_t> selected;
  int64_t remaining = k;
  while (remaining > 0) {
    int64_t best = -1;
    double best_mass = -1.0;
    for (int64_t c = 0; c < k; ++c) {
      if (covered[static_cast<size_t>(c)]) continue;
      double mass = 0;
      for (int64_t u = 0; u < k; ++u) {
        if (covered[static_cast<size_t>(u)]) continue;
        if (endpoint_distance(modes.trajectories, u, modes.trajectories, c) <=
            threshold) {
          mass += modes.probs[static_cast<size_t>(u)];
        }
      }
      if (mass > best_mass) {
        best_mass = mass;
        best = c;
      }
    }
    selected.push_back(best);
    for (int64_t u = 0; u < k; ++u) {
      if (covered[static_cast<size_t>(u)]) continue;
      if (endpoint_distance(modes.trajectories, u, modes.trajectories, best) <=
          threshold) {
        covered[static_cast<size_t>(u)] = 1;
        --remaining;
      }
    }
  }
  return selected;
}

Centroids centroids_from_seeds(const ModeSet& modes,
                               const std::vector<int64_t>& seeds) {
  const int64_t m = static_cast<int64_t>(seeds.size());
  const int64_t tf = modes.horizon();
  Centroids c;
  c.seed_modes = seeds;
  c.trajectories = Array<double>({m, tf, 2});
  if (modes.logstd.size() > 0) c.logstd = Array<double>({m, tf, 2});
  c.probs.assign(static_cast<size_t>(m), 0.0);
  for (int64_t i = 0; i < m; ++i) {
    const int64_t s = seeds[static_cast<size_t>(i)];
    for (int64_t t = 0; t < tf; ++t) {
      c.trajectories.at(i, t, 0) = modes.trajectories.at(s, t, 0);
      c.trajectories.at(i, t, 1) = modes.trajectories.at(s, t, 1);
      if (c.logstd.size() > 0) {
        c.logstd.at(i, t, 0) = modes.logstd.at(s, t, 0);
        c.logstd.at(i, t, 1) = modes.logstd.at(s, t, 1);
      }
    }
  }
  return c;
}

namespace {

std::vector<int64_t> assign_modes(const ModeSet& modes,
                                  const Centroids& centroids) {
  const int64_t k = modes.modes();
  const int64_t m = static_cast<int64_t>(centroids.probs.size());
  std::vector<int64_t> assignment(static_cast<size_t>(k), 0);
  for (int64_t u = 0; u < k; ++u) {
    double best = std::numeric_limits<double>::infinity();
    for (int64_t c = 0; c < m; ++c) {
      const double d =
          endpoint_distance(modes.trajectories, u, centroids.trajectories, c);
      if (d < best) {
        best = d;
        assignment[static_cast<size_t>(u)] = c;
      }
    }
  }
  return assignment;
}

void accumulate_probs(const ModeSet& modes,
                      const std::vector<int64_t>& assignment, Centroids* c) {
  std::fill(c->probs.begin(), c->probs.end(), 0.0);
  for (int64_t u = 0; u < modes.modes(); ++u) {
    c->probs[static_cast<size_t>(assignment[static_cast<size_t>(u)])] +=
        modes.probs[static_cast<size_t>(u)];
  }
}

}  // namespace

Centroids refine(Centroids centroids, const ModeSet& modes,
                 const AggregationConfig& cfg) {
  cfg.validate();
  const int64_t m = static_cast<int64_t>(centroids.probs.size());
  const int64_t tf = modes.horizon();
  std::vector<int64_t> assignment = assign_modes(modes, centroids);
  accumulate_probs(modes, assignment, &centroids);

  for (int64_t it = 0; it < cfg.refine_iterations; ++it) {
    Array<double> sum_traj({m, tf, 2});
    Array<double> sum_ls =
        centroids.logstd.size() > 0 ? Array<double>({m, tf, 2}) : Array<double>();
    std::vector<double> mass(static_cast<size_t>(m), 0.0);
    for (int64_t u = 0; u < modes.modes(); ++u) {
      const int64_t c = assignment[static_cast<size_t>(u)];
      const double p = modes.probs[static_cast<size_t>(u)];
      mass[static_cast<size_t>(c)] += p;
      for (int64_t t = 0; t < tf; ++t) {
        sum_traj.at(c, t, 0) += p * modes.trajectories.at(u, t, 0);
        sum_traj.at(c, t, 1) += p * modes.trajectories.at(u, t, 1);
        if (sum_ls.size() > 0) {
          sum_ls.at(c, t, 0) += p * modes.logstd.at(u, t, 0);
          sum_ls.at(c, t, 1) += p * modes.logstd.at(u, t, 1);
        }
      }
    }
    for (int64_t c = 0; c < m; ++c) {
      // Empty clusters (or clusters holding only zero-mass modes) keep
      // their previous trajectory.
      if (mass[static_cast<size_t>(c)] <= 0) continue;
      const double inv = 1.0 / mass[static_cast<size_t>(c)];
      for (int64_t t = 0; t < tf; ++t) {
        centroids.trajectories.at(c, t, 0) = sum_traj.at(c, t, 0) * inv;
        centroids.trajectories.at(c, t, 1) = sum_traj.at(c, t, 1) * inv;
        if (sum_ls.size() > 0) {
          centroids.logstd.at(c, t, 0) = sum_ls.at(c, t, 0) * inv;
          centroids.logstd.at(c, t, 1) = sum_ls.at(c, t, 1) * inv;
        }
      }
    }
    assignment = assign_modes(modes, centroids);
    accumulate_probs(modes, assignment, &centroids);
  }
  return centroids;
}

ModeSet merge_ensemble(const std::vector<ModeSet>& members) {
  if (members.empty()) throw DataError("merge_ensemble: no members");
  const int64_t tf = members[0].horizon();
  int64_t total = 0;
  bool all_logstd = true;
  for (const auto& m : members) {
    m.validate();
    if (m.horizon() != tf) {
      throw DataError("merge_ensemble: mismatched horizons");
    }
    total += m.modes();
    all_logstd = all_logstd && m.logstd.size() > 0;
  }
  ModeSet out;
  out.trajectories = Array<double>({total, tf, 2});
  if (all_logstd) out.logstd = Array<double>({total, tf, 2});
  const double inv_n = 1.0 / static_cast<double>(members.size());
  int64_t row = 0;
  for (const auto& m : members) {
    for (int64_t u = 0; u < m.modes(); ++u, ++row) {
      out.probs.push_back(m.probs[static_cast<size_t>(u)] * inv_n);
      for (int64_t t = 0; t < tf; ++t) {
        out.trajectories.at(row, t, 0) = m.trajectories.at(u, t, 0);
        out.trajectories.at(row, t, 1) = m.trajectories.at(u, t, 1);
        if (all_logstd) {
          out.logstd.at(row, t, 0) = m.logstd.at(u, t, 0);
          out.logstd.at(row, t, 1) = m.logstd.at(u, t, 1);
        }
      }
    }
  }
  return out;
}

ModeSet aggregate_to_k(const ModeSet& modes, const AggregationConfig& cfg) {
  cfg.validate();
  modes.validate();
  if (modes.modes() < cfg.max_trajectories) {
    throw DataError("aggregate_to_k: fewer modes (" +
                    std::to_string(modes.modes()) + ") than requested "
                    "trajectories (" +
                    std::to_string(cfg.max_trajectories) + ")");
  }
  Centroids c = centroids_from_seeds(
      modes, greedy_init(modes, cfg.distance_threshold));
  c = refine(std::move(c), modes, cfg);

  const int64_t tf = modes.horizon();
  const bool has_ls = modes.logstd.size() > 0;
  struct Row {
    double prob;
    std::vector<double> traj, ls;
  };
  std::vector<Row> rows;
  const int64_t m = static_cast<int64_t>(c.probs.size());
  for (int64_t i = 0; i < m; ++i) {
    Row r;
    r.prob = c.probs[static_cast<size_t>(i)];
    for (int64_t t = 0; t < tf; ++t) {
      r.traj.push_back(c.trajectories.at(i, t, 0));
      r.traj.push_back(c.trajectories.at(i, t, 1));
      if (has_ls) {
        r.ls.push_back(c.logstd.at(i, t, 0));
        r.ls.push_back(c.logstd.at(i, t, 1));
      }
    }
    rows.push_back(std::move(r));
  }

  if (m > cfg.max_trajectories) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.prob > b.prob; });
    rows.resize(static_cast<size_t>(cfg.max_trajectories));
  } else if (m < cfg.max_trajectories) {
    // Pad with the highest-probability original modes that did not seed a
    // centroid.
    std::vector<int64_t> candidates;
    for (int64_t u = 0; u < modes.modes(); ++u) {
      if (std::find(c.seed_modes.begin(), c.seed_modes.end(), u) ==
          c.seed_modes.end()) {
        candidates.push_back(u);
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int64_t a, int64_t b) {
                       return modes.probs[static_cast<size_t>(a)] >
                              modes.probs[static_cast<size_t>(b)];
                     });
    for (int64_t i = 0;
         static_cast<int64_t>(rows.size()) < cfg.max_trajectories &&
         i < static_cast<int64_t>(candidates.size());
         ++i) {
      const int64_t u = candidates[static_cast<size_t>(i)];
      Row r;
      r.prob = modes.probs[static_cast<size_t>(u)];
      for (int64_t t = 0; t < tf; ++t) {
        r.traj.push_back(modes.trajectories.at(u, t, 0));
        r.traj.push_back(modes.trajectories.at(u, t, 1));
        if (has_ls) {
          r.ls.push_back(modes.logstd.at(u, t, 0));
          r.ls.push_back(modes.logstd.at(u, t, 1));
        }
      }
      rows.push_back(std::move(r));
    }
  }

  ModeSet out;
  const int64_t k_out = static_cast<int64_t>(rows.size());
  out.trajectories = Array<double>({k_out, tf, 2});
  if (has_ls) out.logstd = Array<double>({k_out, tf, 2});
  double total_mass = 0;
  for (const Row& r : rows) total_mass += r.prob;
  if (total_mass <= 0) throw NumericError("aggregate_to_k: zero total mass");
  for (int64_t i = 0; i < k_out; ++i) {
    const Row& r = rows[static_cast<size_t>(i)];
    out.probs.push_back(r.prob / total_mass);
    for (int64_t t = 0; t < tf; ++t) {
      out.trajectories.at(i, t, 0) = r.traj[static_cast<size_t>(2 * t)];
      out.trajectories.at(i, t, 1) = r.traj[static_cast<size_t>(2 * t + 1)];
      if (has_ls) {
        out.logstd.at(i, t, 0) = r.ls[static_cast<size_t>(2 * t)];
        out.logstd.at(i, t, 1) = r.ls[static_cast<size_t>(2 * t + 1)];
      }
    }
  }
  return out;
}

}  // namespace trajcast
