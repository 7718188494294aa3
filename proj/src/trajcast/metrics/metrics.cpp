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

#include "trajcast/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "trajcast/core/error.hpp"
#include "trajcast/scene/frame.hpp"

namespace trajcast {

void MetricsConfig::validate() const {
  if (top_k < 1) throw UsageError("metrics: top_k must be >= 1");
  for (const auto& h : miss_thresholds) {
    if (h.step < 1 || h.threshold <= 0) {
      throw UsageError("metrics: horizon thresholds must have step >= 1 and "
                       "a positive distance");
    }
  }
  if (map_threshold <= 0 || overlap_radius <= 0 ||
      bucket_stationary_displacement <= 0 || bucket_turn_angle <= 0) {
    throw UsageError("metrics: thresholds must be positive");
  }
}

std::vector<std::pair<std::string, double>> MetricsReport::named() const {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("minADE", min_ade);
  out.emplace_back("minFDE", min_fde);
  out.emplace_back("brier_minFDE", brier_min_fde);
  out.emplace_back("mAP", map_value);
  out.emplace_back("overlap", overlap);
  for (const auto& [t, v] : min_de)
    out.emplace_back("minDE_t" + std::to_string(t), v);
  for (const auto& [t, v] : miss_rate)
    out.emplace_back("MR_t" + std::to_string(t), v);
  return out;
}

namespace metrics {

std::vector<int64_t> top_k_modes(const ModeSet& modes, int64_t k) {
  std::vector<int64_t> idx(static_cast<size_t>(modes.modes()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int64_t a, int64_t b) {
    return modes.probs[static_cast<size_t>(a)] >
           modes.probs[static_cast<size_t>(b)];
  });
  if (static_cast<int64_t>(idx.size()) > k)
    idx.resize(static_cast<size_t>(k));
  return idx;
}

namespace {

double dist_at(const Array<double>& preds, int64_t mode,
               const Array<double>& gt, int64_t t) {
  const double dx = preds.at(mode, t, 0) - gt.at(t, 0);
  const double dy = preds.at(mode, t, 1) - gt.at(t, 1);
  return std::hypot(dx, dy);
}

}  // namespace

double min_ade(const Array<double>& preds, const Array<double>& gt) {
  const int64_t k = preds.dim(0), tf = preds.dim(1);
  double best = std::numeric_limits<double>::infinity();
  for (int64_t m = 0; m < k; ++m) {
    double acc = 0;
    for (int64_t t = 0; t < tf; ++t) acc += dist_at(preds, m, gt, t);
    best = std::min(best, acc / static_cast<double>(tf));
  }
  return best;
}

double min_fde(const Array<double>& preds, const Array<double>& gt) {
  return min_de_at(preds, gt, preds.dim(1));
}

double min_de_at(const Array<double>& preds, const Array<double>& gt,
                 int64_t step) {
  const int64_t k = preds.dim(0);
  if (step < 1 || step > preds.dim(1)) {
    throw UsageError("min_de_at: step outside horizon");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int64_t m = 0; m < k; ++m)
    best = std::min(best, dist_at(preds, m, gt, step - 1));
  return best;
}

bool miss_at(const Array<double>& preds, const Array<double>& gt,
             int64_t step, double threshold) {
  return min_de_at(preds, gt, step) > threshold;
}

double overlap_fraction(const Array<double>& trajectory,
                        const std::vector<Array<double>>& others_gt,
                        double radius) {
  const int64_t tf = trajectory.dim(0);
  if (others_gt.empty()) return 0.0;
  int64_t overlapping = 0;
  for (int64_t t = 0; t < tf; ++t) {
    bool hit = false;
    for (const auto& other : others_gt) {
      const double dx = trajectory.at(t, 0) - other.at(t, 0);
      const double dy = trajectory.at(t, 1) - other.at(t, 1);
      if (std::hypot(dx, dy) < 2.0 * radius) {
        hit = true;
        break;
      }
    }
    if (hit) ++overlapping;
  }
  return static_cast<double>(overlapping) / static_cast<double>(tf);
}

std::string behavior_bucket(const Array<double>& gt,
                            const MetricsConfig& cfg) {
  const int64_t tf = gt.dim(0);
  const double disp = std::hypot(gt.at(tf - 1, 0) - gt.at(0, 0),
                                 gt.at(tf - 1, 1) - gt.at(0, 1));
  if (disp < cfg.bucket_stationary_displacement) return "stationary";
  // Net heading change between the first and last moving step.
  constexpr double kMoveEps = 1e-6;
  double first = 0, last = 0;
  bool have_first = false;
  for (int64_t t = 1; t < tf; ++t) {
    const double dx = gt.at(t, 0) - gt.at(t - 1, 0);
    const double dy = gt.at(t, 1) - gt.at(t - 1, 1);
    if (std::hypot(dx, dy) < kMoveEps) continue;
    const double h = std::atan2(dy, dx);
    if (!have_first) {
      first = h;
      have_first = true;
    }
    last = h;
  }
  if (!have_first) return "stationary";
  const double change = wrap_angle(last - first);
  if (change > cfg.bucket_turn_angle) return "left_turn";
  if (change < -cfg.bucket_turn_angle) return "right_turn";
  return "straight";
}

double average_precision(std::vector<MapEntry> entries, int64_t positives) {
  if (positives <= 0) throw DataError("average_precision: no positives");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const MapEntry& a, const MapEntry& b) {
                     return a.confidence > b.confidence;
                   });
  double ap = 0;
  int64_t tp = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].true_positive) continue;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  return ap / static_cast<double>(positives);
}

}  // namespace metrics

MetricsReport evaluate_predictions(const std::vector<PredictionRecord>& preds,
                                   const std::vector<SceneTensors>& scenes,
                                   const MetricsConfig& cfg) {
  cfg.validate();
  if (preds.empty()) throw DataError("evaluate: no prediction records");

  std::map<int64_t, const SceneTensors*> by_id;
  for (const auto& s : scenes) by_id[s.scene_id] = &s;

  MetricsReport rep;
  rep.min_de.reserve(cfg.miss_thresholds.size());
  std::vector<double> de_sums(cfg.miss_thresholds.size(), 0.0);
  std::vector<int64_t> miss_counts(cfg.miss_thresholds.size(), 0);
  std::map<std::string, std::vector<metrics::MapEntry>> bucket_entries;
  std::map<std::string, int64_t> bucket_positives;
  double ade_sum = 0, fde_sum = 0, brier_sum = 0, overlap_sum = 0;
  int64_t n = 0;

  for (const auto& rec : preds) {
    auto it = by_id.find(rec.scene_id);
    if (it == by_id.end()) {
      throw DataError("evaluate: prediction references unknown scene " +
                      std::to_string(rec.scene_id));
    }
    const SceneTensors& scene = *it->second;
    if (rec.agent < 0 || rec.agent >= scene.agents()) {
      throw DataError("evaluate: prediction references agent " +
                      std::to_string(rec.agent) + " outside scene");
    }
    rec.modes.validate();
    const int64_t tf = rec.modes.horizon();
    if (tf > scene.future_steps()) {
      throw DataError("evaluate: prediction horizon exceeds scene future");
    }

    Array<double> gt({tf, 2});
    for (int64_t t = 0; t < tf; ++t) {
      gt.at(t, 0) = scene.future.at(rec.agent, t, 0);
      gt.at(t, 1) = scene.future.at(rec.agent, t, 1);
    }

    const auto top = metrics::top_k_modes(rec.modes, cfg.top_k);
    Array<double> sel({static_cast<int64_t>(top.size()), tf, 2});
    for (size_t m = 0; m < top.size(); ++m)
      for (int64_t t = 0; t < tf; ++t) {
        sel.at(static_cast<int64_t>(m), t, 0) =
            rec.modes.trajectories.at(top[m], t, 0);
        sel.at(static_cast<int64_t>(m), t, 1) =
            rec.modes.trajectories.at(top[m], t, 1);
      }

    ade_sum += metrics::min_ade(sel, gt);
    const double fde = metrics::min_fde(sel, gt);
    fde_sum += fde;

    // Probability of the mode achieving the minimum final displacement.
    double best_fde = std::numeric_limits<double>::infinity();
    double best_prob = 0;
    for (size_t m = 0; m < top.size(); ++m) {
      const double dx = sel.at(static_cast<int64_t>(m), tf - 1, 0) -
                        gt.at(tf - 1, 0);
      const double dy = sel.at(static_cast<int64_t>(m), tf - 1, 1) -
                        gt.at(tf - 1, 1);
      const double d = std::hypot(dx, dy);
      if (d < best_fde) {
        best_fde = d;
        best_prob = rec.modes.probs[static_cast<size_t>(top[m])];
      }
    }
    brier_sum += fde + (1.0 - best_prob) * (1.0 - best_prob);

    for (size_t h = 0; h < cfg.miss_thresholds.size(); ++h) {
      const auto& ht = cfg.miss_thresholds[h];
      if (ht.step > tf) {
        throw UsageError("metrics: horizon step " + std::to_string(ht.step) +
                         " exceeds prediction horizon");
      }
      de_sums[h] += metrics::min_de_at(sel, gt, ht.step);
      miss_counts[h] +=
          metrics::miss_at(sel, gt, ht.step, ht.threshold) ? 1 : 0;
    }

    // Overlap for the most likely trajectory against other agents' ground
    // truth in the same scene.
    std::vector<Array<double>> others;
    for (int64_t b = 0; b < scene.agents(); ++b) {
      if (b == rec.agent) continue;
      Array<double> og({tf, 2});
      for (int64_t t = 0; t < tf; ++t) {
        og.at(t, 0) = scene.future.at(b, t, 0);
        og.at(t, 1) = scene.future.at(b, t, 1);
      }
      others.push_back(std::move(og));
    }
    Array<double> most_likely({tf, 2});
    for (int64_t t = 0; t < tf; ++t) {
      most_likely.at(t, 0) = sel.at(0, t, 0);
      most_likely.at(t, 1) = sel.at(0, t, 1);
    }
    overlap_sum +=
        metrics::overlap_fraction(most_likely, others, cfg.overlap_radius);

    // mAP entries: at most one true positive per agent, the closest mode
    // by endpoint distance within the match threshold.
    const std::string bucket = metrics::behavior_bucket(gt, cfg);
    bucket_positives[bucket] += 1;
    int64_t tp_mode = -1;
    double tp_dist = std::numeric_limits<double>::infinity();
    for (size_t m = 0; m < top.size(); ++m) {
      const double dx = sel.at(static_cast<int64_t>(m), tf - 1, 0) -
                        gt.at(tf - 1, 0);
      const double dy = sel.at(static_cast<int64_t>(m), tf - 1, 1) -
                        gt.at(tf - 1, 1);
      const double d = std::hypot(dx, dy);
      if (d <= cfg.map_threshold && d < tp_dist) {
        tp_dist = d;
        tp_mode = static_cast<int64_t>(m);
      }
    }
    for (size_t m = 0; m < top.size(); ++m) {
      bucket_entries[bucket].push_back(
          {rec.modes.probs[static_cast<size_t>(top[m])],
           static_cast<int64_t>(m) == tp_mode});
    }
    ++n;
  }

  rep.agents_evaluated = n;
  rep.min_ade = ade_sum / static_cast<double>(n);
  rep.min_fde = fde_sum / static_cast<double>(n);
  rep.brier_min_fde = brier_sum / static_cast<double>(n);
  rep.overlap = overlap_sum / static_cast<double>(n);
  for (size_t h = 0; h < cfg.miss_thresholds.size(); ++h) {
    rep.min_de.emplace_back(cfg.miss_thresholds[h].step,
                            de_sums[h] / static_cast<double>(n));
    rep.miss_rate.emplace_back(
        cfg.miss_thresholds[h].step,
        static_cast<double>(miss_counts[h]) / static_cast<double>(n));
  }

  if (bucket_entries.empty()) {
    throw DataError("evaluate: no non-empty behavior bucket");
  }
  double ap_sum = 0;
  for (const auto& [bucket, entries] : bucket_entries) {
    ap_sum += metrics::average_precision(entries, bucket_positives[bucket]);
  }
  rep.map_value = ap_sum / static_cast<double>(bucket_entries.size());
  return rep;
}

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream os;
  os << "agents evaluated: " << report.agents_evaluated << "\n";
  for (const auto& [name, value] : report.named()) {
    os << name << ": " << value << "\n";
  }
  return os.str();
}

std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "metric,value\n";
  os.precision(17);
  for (const auto& [name, value] : report.named()) {
    os << name << "," << value << "\n";
  }
  return os.str();
}

}  // namespace trajcast
