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

// Pushing-probability scoring. Deep-model scores arrive as a score file; the
// built-in logistic baseline keeps the pipeline runnable without one.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdpush/dataset.hpp"
#include "crowdpush/error.hpp"
#include "crowdpush/parallel.hpp"
#include "crowdpush/text.hpp"

namespace crowdpush {

/// pushing iff delta >= threshold.
inline Label classify(double delta, double threshold) {
  return delta >= threshold ? Label::pushing : Label::non_pushing;
}

/// Per-sample pushing probabilities, in insertion order.
struct ScoreSet {
  std::vector<std::pair<std::string, double>> rows;

  std::map<std::string, double> by_id() const {
    std::map<std::string, double> m;
    for (const auto& [id, d] : rows) m.emplace(id, d);
    return m;
  }

  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

inline void validate(const ScoreSet& s) {
  std::set<std::string> ids;
  for (const auto& [id, d] : s.rows) {
    if (!ids.insert(id).second) throw ValidationError("duplicate sample_id " + id + " in scores");
    if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("score for " + id + " is outside [0, 1]");
  }
}

inline ScoreSet parse_scores(std::istream& in, const std::string& source = "scores") {
  const auto table = text::CsvTable::parse(in, source);
  ScoreSet s;
  for (std::size_t i = 0; i < table.size(); ++i) s.rows.emplace_back(table.at(i, "sample_id"), table.double_at(i, "delta"));
  validate(s);
  return s;
}

inline ScoreSet load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_scores(in, path.string());
}

inline std::string format_scores(const ScoreSet& s) {
  std::string out = "sample_id,delta\n";
  for (const auto& [id, d] : s.rows) out += id + ',' + text::format_double(d) + '\n';
  return out;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Logistic model over sample descriptors. The last weight is the bias.
struct BaselineModel {
  std::vector<double> weights;
  std::uint64_t seed = 0;
  int epochs = 200;
  double lr = 0.05;

  double predict(std::span<const double> x) const {
    if (x.size() + 1 != weights.size()) throw ValidationError("descriptor length does not match model");
    double z = weights.back();
    for (std::size_t i = 0; i < x.size(); ++i) z += weights[i] * x[i];
    return sigmoid(z);
  }

  friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

inline nlohmann::json to_json(const BaselineModel& m) {
  return {{"weights", m.weights}, {"seed", m.seed}, {"epochs", m.epochs}, {"lr", m.lr}};
}

inline BaselineModel model_from_json(const nlohmann::json& j) {
  BaselineModel m;
  try {
    m.weights = j.at("weights").get<std::vector<double>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.epochs = j.at("epochs").get<int>();
    m.lr = j.at("lr").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
  if (m.weights.empty()) throw ValidationError("model file: empty weights");
  for (double w : m.weights)
    if (!std::isfinite(w)) throw ValidationError("model file: non-finite weight");
  return m;
}

inline BaselineModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// Full-batch gradient descent on mean binary cross-entropy: zero-initialised
/// weights, 200 epochs, learning rate 0.05. The seed is recorded only; the
/// procedure has no random component.
inline BaselineModel train_logistic(std::span<const std::vector<double>> features, std::span<const Label> labels,
                                    std::uint64_t seed) {
  if (features.size() != labels.size()) throw ValidationError("feature and label counts differ");
  if (features.empty()) throw DegenerateTrainingError("no training samples");
  bool has_pos = false, has_neg = false;
  for (Label l : labels) {
    if (l == Label::unknown) throw ValidationError("training labels must be known");
    has_pos |= l == Label::pushing;
    has_neg |= l == Label::non_pushing;
  }
  if (!has_pos || !has_neg) throw DegenerateTrainingError("training data holds a single class");
  const std::size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw ValidationError("descriptors have inconsistent length");

  BaselineModel model;
  model.seed = seed;
  model.weights.assign(dim + 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.size());
  std::vector<double> grad(dim + 1);
  for (int epoch = 0; epoch < model.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t s = 0; s < features.size(); ++s) {
      const double err = model.predict(features[s]) - (labels[s] == Label::pushing ? 1.0 : 0.0);
      for (std::size_t i = 0; i < dim; ++i) grad[i] += err * features[s][i];
      grad[dim] += err;
    }
    for (std::size_t i = 0; i <= dim; ++i) model.weights[i] -= model.lr * inv_n * grad[i];
  }
  return model;
}

/// Trains on the retained, labeled rows of the train split.
inline BaselineModel train_baseline(const SampleManifest& manifest, const FeatureSource& features, std::uint64_t seed,
                                    std::size_t jobs = 1) {
  std::vector<const SampleRow*> rows;
  for (const auto& r : manifest.rows)
    if (r.split == Split::train && !r.is_duplicate() && r.label != Label::unknown) rows.push_back(&r);
  std::vector<std::vector<double>> x(rows.size());
  std::vector<Label> y(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    x[i] = features(*rows[i]);
    y[i] = rows[i]->label;
  });
  return train_logistic(x, y, seed);
}

/// Baseline scores for every manifest row, in manifest order.
inline ScoreSet score(const SampleManifest& manifest, const BaselineModel& model, const FeatureSource& features,
                      std::size_t jobs = 1) {
  ScoreSet out;
  out.rows.resize(manifest.rows.size());
  parallel_for(manifest.rows.size(), jobs, [&](std::size_t i) {
    const auto& r = manifest.rows[i];
    out.rows[i] = {r.sample_id, model.predict(features(r))};
  });
  return out;
}

/// Restricts an external score file to the manifest, in manifest order.
/// Values pass through unchanged. Throws CoverageError listing missing ids.
inline ScoreSet score(const SampleManifest& manifest, const ScoreSet& score_file) {
  validate(score_file);
  const auto lookup = score_file.by_id();
  ScoreSet out;
  std::vector<std::string> missing;
  for (const auto& r : manifest.rows) {
    const auto it = lookup.find(r.sample_id);
    if (it == lookup.end()) {
      missing.push_back(r.sample_id);
      continue;
    }
    out.rows.emplace_back(r.sample_id, it->second);
  }
  if (!missing.empty()) throw CoverageError(std::move(missing));
  return out;
}

}  // namespace crowdpush
