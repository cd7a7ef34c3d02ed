// Copyright 2026 The crowdpush Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Imbalance-aware evaluation: true pushing / non-pushing rates, macro
// accuracy, ROC/AUC and the threshold that balances the two rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdpush/classifier.hpp"
#include "crowdpush/dataset.hpp"
#include "crowdpush/error.hpp"

namespace crowdpush {

struct ConfusionCounts {
  std::uint64_t tp = 0;   // pushing predicted pushing
  std::uint64_t fnp = 0;  // pushing predicted non-pushing
  std::uint64_t tnp = 0;  // non-pushing predicted non-pushing
  std::uint64_t fp = 0;   // non-pushing predicted pushing

  std::uint64_t positives() const { return tp + fnp; }
  std::uint64_t negatives() const { return tnp + fp; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

namespace detail {

inline void check_inputs(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw ValidationError("score and label counts differ");
  for (Label l : labels)
    if (l == Label::unknown) throw ValidationError("evaluation labels must be pushing or non-pushing");
}

inline void check_both_classes(std::span<const Label> labels, const char* what) {
  const bool pos = std::find(labels.begin(), labels.end(), Label::pushing) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), Label::non_pushing) != labels.end();
  if (!pos || !neg) throw UndefinedRateError(std::string(what) + " needs both classes");
}

}  // namespace detail

inline ConfusionCounts confusion(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  detail::check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = classify(scores[i], threshold) == Label::pushing;
    if (labels[i] == Label::pushing) {
      predicted ? ++c.tp : ++c.fnp;
    } else {
      predicted ? ++c.fp : ++c.tnp;
    }
  }
  return c;
}

/// TP / (TP + FNP). Throws UndefinedRateError without positives.
inline double tpr(const ConfusionCounts& c) {
  if (c.positives() == 0) throw UndefinedRateError("TPR undefined: no pushing samples");
  return static_cast<double>(c.tp) / static_cast<double>(c.positives());
}

/// TNP / (TNP + FP). Throws UndefinedRateError without negatives.
inline double tnpr(const ConfusionCounts& c) {
  if (c.negatives() == 0) throw UndefinedRateError("TNPR undefined: no non-pushing samples");
  return static_cast<double>(c.tnp) / static_cast<double>(c.negatives());
}

inline double macro_accuracy(double tpr_value, double tnpr_value) { return (tpr_value + tnpr_value) / 2.0; }

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  std::vector<double> thresholds;  // thresholds[k] produced points[k]; first is +inf
  double auc = 0.0;
};

/// Sweeps the inclusive rule over every distinct score (descending, after a
/// +inf sentinel) and integrates with the trapezoid rule.
inline RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  detail::check_inputs(scores, labels);
  detail::check_both_classes(labels, "ROC/AUC");
  std::vector<std::pair<double, bool>> order;
  order.reserve(scores.size());
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool is_pos = labels[i] == Label::pushing;
    order.emplace_back(scores[i], is_pos);
    is_pos ? ++pos : ++neg;
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = order[i].first;
    for (; i < order.size() && order[i].first == t; ++i) order[i].second ? ++tp : ++fp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
    roc.thresholds.push_back(t);
  }
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto& a = roc.points[k - 1];
    const auto& b = roc.points[k];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

struct ThresholdChoice {
  double threshold = 0.0;
  double tpr = 0.0;
  double tnpr = 0.0;
  double objective = 0.0;  // |TPR - TNPR|
};

/// Minimises |TPR - TNPR| over the distinct scores plus {0, 1}. Ties go to
/// the larger TPR + TNPR, then to the smaller threshold. Comparisons use
/// exact integer cross-multiplication.
inline ThresholdChoice optimal_threshold(std::span<const double> scores, std::span<const Label> labels) {
  detail::check_inputs(scores, labels);
  detail::check_both_classes(labels, "threshold tuning");
  std::vector<double> candidates(scores.begin(), scores.end());
  candidates.push_back(0.0);
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  bool have = false;
  ConfusionCounts best_counts;
  double best_threshold = 0.0;
  // |TP*N - TNP*P| and TP*N + TNP*P share the denominator P*N.
  std::uint64_t best_gap = 0, best_sum = 0;
  for (double t : candidates) {
    const auto c = confusion(scores, labels, t);
    const std::uint64_t a = c.tp * c.negatives();
    const std::uint64_t b = c.tnp * c.positives();
    const std::uint64_t gap = a > b ? a - b : b - a;
    const std::uint64_t sum = a + b;
    if (!have || gap < best_gap || (gap == best_gap && sum > best_sum)) {
      have = true;
      best_gap = gap;
      best_sum = sum;
      best_counts = c;
      best_threshold = t;
    }
  }
  ThresholdChoice out;
  out.threshold = best_threshold;
  out.tpr = tpr(best_counts);
  out.tnpr = tnpr(best_counts);
  out.objective = std::abs(out.tpr - out.tnpr);
  return out;
}

struct EvalReport {
  double threshold = 0.5;
  double tpr = 0.0;
  double tnpr = 0.0;
  double macro_accuracy = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc;
  ConfusionCounts confusion;
};

inline EvalReport evaluate(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion(scores, labels, threshold);
  r.tpr = tpr(r.confusion);
  r.tnpr = tnpr(r.confusion);
  r.macro_accuracy = macro_accuracy(r.tpr, r.tnpr);
  const auto roc = roc_auc(scores, labels);
  r.auc = roc.auc;
  r.roc = roc.points;
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  return {{"threshold", r.threshold},
          {"tpr", r.tpr},
          {"tnpr", r.tnpr},
          {"macro_accuracy", r.macro_accuracy},
          {"auc", r.auc},
          {"confusion", {{"tp", r.confusion.tp}, {"fnp", r.confusion.fnp}, {"tnp", r.confusion.tnp}, {"fp", r.confusion.fp}}},
          {"roc", roc}};
}

inline nlohmann::json to_json(const ThresholdChoice& t) {
  return {{"threshold", t.threshold}, {"tpr", t.tpr}, {"tnpr", t.tnpr}, {"objective", t.objective}};
}

/// Percentages in the order threshold | macro acc. | TNPR | TPR | |TPR-TNPR| | AUC.
inline std::string table_row(const EvalReport& r, const std::string& name) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s threshold=%.3f  macro=%.0f%%  TNPR=%.0f%%  TPR=%.0f%%  |TPR-TNPR|=%.0f  AUC=%.2f",
                name.c_str(), r.threshold, 100.0 * r.macro_accuracy, 100.0 * r.tnpr, 100.0 * r.tpr,
                100.0 * std::abs(r.tpr - r.tnpr), r.auc);
  return buf;
}

struct LabeledScores {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<Label> labels;
};

/// Joins manifest rows of one split with their scores. Rows without a known
/// label and duplicates are skipped. Throws CoverageError for unscored rows.
inline LabeledScores select_split(const SampleManifest& manifest, const ScoreSet& scores, Split split) {
  const auto lookup = scores.by_id();
  LabeledScores out;
  std::vector<std::string> missing;
  for (const auto& r : manifest.rows) {
    if (r.split != split || r.is_duplicate() || r.label == Label::unknown) continue;
    const auto it = lookup.find(r.sample_id);
    if (it == lookup.end()) {
      missing.push_back(r.sample_id);
      continue;
    }
    out.ids.push_back(r.sample_id);
    out.scores.push_back(it->second);
    out.labels.push_back(r.label);
  }
  if (!missing.empty()) throw CoverageError(std::move(missing));
  return out;
}

}  // namespace crowdpush
