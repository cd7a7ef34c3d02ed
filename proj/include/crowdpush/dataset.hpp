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

// Sample manifests: labeling from ground truth, near-duplicate removal and
// frame-level train/val/test splitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdpush/error.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/parallel.hpp"
#include "crowdpush/region.hpp"
#include "crowdpush/text.hpp"

namespace crowdpush {

enum class Label { pushing, non_pushing, unknown };
enum class Split { train, val, test1, test2, none };

inline std::string to_string(Label l) {
  switch (l) {
    case Label::pushing: return "pushing";
    case Label::non_pushing: return "non-pushing";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

inline Label label_from_string(const std::string& s) {
  if (s == "pushing") return Label::pushing;
  if (s == "non-pushing") return Label::non_pushing;
  if (s == "unknown" || s.empty()) return Label::unknown;
  throw ValidationError("unknown label '" + s + "'");
}

inline std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test1: return "test1";
    case Split::test2: return "test2";
    case Split::none: return "none";
  }
  return "none";
}

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test1") return Split::test1;
  if (s == "test2") return Split::test2;
  if (s == "none" || s.empty()) return Split::none;
  throw ValidationError("unknown split '" + s + "'");
}

/// `<video_id>_f<frame:06>_p<person_id>`
inline std::string sample_id(const std::string& video_id, std::int64_t frame, std::int64_t person_id) {
  return video_id + "_f" + text::zero_pad(frame, 6) + "_p" + std::to_string(person_id);
}

/// `<video_id>_<frame:06>.png`
inline std::string frame_file_name(const std::string& video_id, std::int64_t frame) {
  return video_id + "_" + text::zero_pad(frame, 6) + ".png";
}

// ---------------------------------------------------------------------------
// Region manifest (output of region extraction)

struct RegionRow {
  std::string sample_id;
  std::string video_id;
  std::int64_t frame = 0;
  std::int64_t person_id = 0;
  std::string path;
  RegionMode mode = RegionMode::voronoi;

  friend bool operator==(const RegionRow&, const RegionRow&) = default;
};

inline std::string format_region_manifest(std::span<const RegionRow> rows) {
  std::string out = "sample_id,video_id,frame,person_id,path,mode\n";
  for (const auto& r : rows) {
    out += r.sample_id + ',' + r.video_id + ',' + std::to_string(r.frame) + ',' + std::to_string(r.person_id) + ',' +
           r.path + ',' + to_string(r.mode) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample manifest

struct SampleRow {
  std::string sample_id;
  std::string video_id;
  std::int64_t frame = 0;
  std::int64_t person_id = 0;
  std::string path;
  Label label = Label::unknown;
  Split split = Split::none;
  std::string duplicate_of;  // empty when retained

  bool is_duplicate() const { return !duplicate_of.empty(); }
  friend bool operator==(const SampleRow&, const SampleRow&) = default;
};

struct SampleManifest {
  std::vector<SampleRow> rows;

  std::size_t find(const std::string& id) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].sample_id == id) return i;
    return rows.size();
  }

  /// Rows ordered by sample_id; every operation here keeps that order.
  void sort() {
    std::sort(rows.begin(), rows.end(), [](const SampleRow& a, const SampleRow& b) { return a.sample_id < b.sample_id; });
  }

  friend bool operator==(const SampleManifest&, const SampleManifest&) = default;
};

inline void validate(const SampleManifest& m) {
  std::set<std::string> ids;
  for (const auto& r : m.rows) {
    if (r.sample_id.empty()) throw ValidationError("manifest row with empty sample_id");
    if (!ids.insert(r.sample_id).second) throw ValidationError("duplicate sample_id " + r.sample_id);
  }
  std::set<std::string> earlier;
  for (const auto& r : m.rows) {
    if (r.is_duplicate()) {
      if (r.split != Split::none) throw ValidationError(r.sample_id + ": duplicate rows must have split none");
      if (!earlier.count(r.duplicate_of))
        throw ValidationError(r.sample_id + ": duplicate_of must name an earlier sample");
    }
    earlier.insert(r.sample_id);
  }
}

/// Reads either a region manifest or a sample manifest; missing label and
/// split columns default to unknown/none.
inline SampleManifest parse_manifest(std::istream& in, const std::string& source = "manifest") {
  const auto table = text::CsvTable::parse(in, source);
  SampleManifest m;
  const bool has_label = table.has("label");
  const bool has_split = table.has("split");
  const bool has_dup = table.has("duplicate_of");
  for (std::size_t i = 0; i < table.size(); ++i) {
    SampleRow r;
    r.sample_id = table.at(i, "sample_id");
    r.video_id = table.at(i, "video_id");
    r.frame = table.int_at<std::int64_t>(i, "frame");
    r.person_id = table.int_at<std::int64_t>(i, "person_id");
    r.path = table.at(i, "path");
    try {
      if (has_label) r.label = label_from_string(table.at(i, "label"));
      if (has_split) r.split = split_from_string(table.at(i, "split"));
    } catch (const ValidationError& e) {
      throw ParseError(table.line_of(i), source + ": " + e.what());
    }
    if (has_dup) r.duplicate_of = table.at(i, "duplicate_of");
    m.rows.push_back(std::move(r));
  }
  m.sort();
  validate(m);
  return m;
}

inline SampleManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_manifest(in, path.string());
}

inline std::string format_manifest(const SampleManifest& m) {
  std::string out = "sample_id,video_id,frame,person_id,path,label,split,duplicate_of\n";
  for (const auto& r : m.rows) {
    out += r.sample_id + ',' + r.video_id + ',' + std::to_string(r.frame) + ',' + std::to_string(r.person_id) + ',' +
           r.path + ',' + to_string(r.label) + ',' + to_string(r.split) + ',' + r.duplicate_of + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth

/// Keyed by (video_id, person_id, frame).
using GroundTruthKey = std::tuple<std::string, std::int64_t, std::int64_t>;

struct GroundTruth {
  std::map<GroundTruthKey, Label> entries;
};

/// CSV `person_id,frame,label` with label 1 = pushing, 0 = non-pushing.
inline void parse_ground_truth(std::istream& in, const std::string& video_id, GroundTruth& gt,
                               const std::string& source = "ground truth") {
  const auto table = text::CsvTable::parse(in, source);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto person = table.int_at<std::int64_t>(i, "person_id");
    const auto frame = table.int_at<std::int64_t>(i, "frame");
    const auto flag = table.int_at<int>(i, "label");
    if (flag != 0 && flag != 1) throw ParseError(table.line_of(i), source + ": label must be 0 or 1");
    if (!gt.entries.emplace(GroundTruthKey{video_id, person, frame}, flag == 1 ? Label::pushing : Label::non_pushing)
             .second) {
      throw DuplicateRecordError(source + ": duplicate entry for person " + std::to_string(person) + " at frame " +
                                 std::to_string(frame));
    }
  }
}

inline void load_ground_truth(const std::filesystem::path& path, const std::string& video_id, GroundTruth& gt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  parse_ground_truth(in, video_id, gt, path.string());
}

struct LabelSummary {
  std::size_t pushing = 0;
  std::size_t non_pushing = 0;
  std::size_t unknown = 0;
  std::size_t unmatched_ground_truth = 0;  // entries with no sample
};

/// Copies each sample's label from ground truth; samples without an entry
/// become unknown.
inline LabelSummary label_samples(SampleManifest& manifest, const GroundTruth& gt) {
  LabelSummary summary;
  std::set<GroundTruthKey> used;
  for (auto& r : manifest.rows) {
    const GroundTruthKey key{r.video_id, r.person_id, r.frame};
    const auto it = gt.entries.find(key);
    r.label = it == gt.entries.end() ? Label::unknown : it->second;
    if (it != gt.entries.end()) used.insert(key);
    switch (r.label) {
      case Label::pushing: ++summary.pushing; break;
      case Label::non_pushing: ++summary.non_pushing; break;
      case Label::unknown: ++summary.unknown; break;
    }
  }
  summary.unmatched_ground_truth = gt.entries.size() - used.size();
  return summary;
}

// ---------------------------------------------------------------------------
// Near-duplicate detection

inline constexpr int kDescriptorSide = 32;

/// Grey-level 32x32 area-average thumbnail in [0, 1], flattened row-major
/// with its mean subtracted.
inline std::vector<double> feature_vector(const Image& crop) {
  if (crop.width < 1 || crop.height < 1) throw ValidationError("empty crop");
  constexpr int side = kDescriptorSide;
  std::vector<double> v(side * side, 0.0);
  for (int by = 0; by < side; ++by) {
    const int y0 = by * crop.height / side;
    const int y1 = std::max(y0 + 1, (by + 1) * crop.height / side);
    for (int bx = 0; bx < side; ++bx) {
      const int x0 = bx * crop.width / side;
      const int x1 = std::max(x0 + 1, (bx + 1) * crop.width / side);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const auto* p = crop.at(std::min(x, crop.width - 1), std::min(y, crop.height - 1));
          sum += 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        }
      }
      v[static_cast<std::size_t>(by) * side + bx] = sum / ((y1 - y0) * (x1 - x0) * 255.0);
    }
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : v) x -= mean;
  return v;
}

/// Cosine of the angle between u and v; 0 when either norm is below 1e-12.
inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ValidationError("cosine similarity of vectors with different lengths");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

/// Supplies a descriptor per sample.
using FeatureSource = std::function<std::vector<double>(const SampleRow&)>;

/// Descriptors computed from crop files, resolved relative to `base_dir`.
inline FeatureSource crop_features(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const SampleRow& row) { return feature_vector(read_png(base / row.path)); };
}

/// CSV `sample_id,e1,...,ek`.
inline std::map<std::string, std::vector<double>> load_embeddings(const std::filesystem::path& path) {
  const auto table = text::CsvTable::load(path);
  if (table.header().empty() || table.header()[0] != "sample_id")
    throw ValidationError(path.string() + ": first column must be sample_id");
  std::map<std::string, std::vector<double>> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.row(i);
    std::vector<double> e;
    e.reserve(row.size() - 1);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto v = text::parse_double(row[c]);
      if (!v) throw ParseError(table.line_of(i), path.string() + ": non-numeric embedding value");
      e.push_back(*v);
    }
    if (!out.emplace(row[0], std::move(e)).second)
      throw ValidationError(path.string() + ": duplicate sample_id " + row[0]);
  }
  return out;
}

inline FeatureSource embedding_features(std::map<std::string, std::vector<double>> embeddings) {
  return [table = std::move(embeddings)](const SampleRow& row) {
    const auto it = table.find(row.sample_id);
    if (it == table.end()) throw NotFoundError("no embedding for sample " + row.sample_id);
    return it->second;
  };
}

struct DedupStats {
  std::size_t original = 0;
  std::size_t deleted = 0;
  std::size_t distinct = 0;
};

/// Greedy first-wins scan in sample_id order: a sample whose similarity to
/// any retained sample reaches `tau` becomes a duplicate of the first such
/// sample and leaves its split. Rows already marked stay marked.
inline DedupStats deduplicate(SampleManifest& manifest, double tau, const FeatureSource& features,
                              std::size_t jobs = 1) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("dedup threshold must be in (0, 1]");
  manifest.sort();
  const std::size_t n = manifest.rows.size();
  std::vector<std::vector<double>> desc(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    if (!manifest.rows[i].is_duplicate()) desc[i] = features(manifest.rows[i]);
  });

  DedupStats stats;
  stats.original = n;
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = manifest.rows[i];
    if (row.is_duplicate()) {
      ++stats.deleted;
      continue;
    }
    for (std::size_t k : retained) {
      if (cosine_similarity(desc[i], desc[k]) >= tau) {
        row.duplicate_of = manifest.rows[k].sample_id;
        row.split = Split::none;
        break;
      }
    }
    if (row.is_duplicate()) {
      ++stats.deleted;
    } else {
      retained.push_back(i);
    }
  }
  stats.distinct = stats.original - stats.deleted;
  return stats;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;

  void validate() const {
    if (!(train > 0.0 && val > 0.0 && test > 0.0)) throw ValidationError("split ratios must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
  }
};

inline SplitRatios parse_ratios(const std::string& s) {
  const auto parts = text::split_csv(s);
  if (parts.size() != 3) throw ValidationError("ratios must be three comma-separated numbers");
  std::array<double, 3> v{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto d = text::parse_double(parts[i]);
    if (!d) throw ValidationError("ratio '" + parts[i] + "' is not a number");
    v[i] = *d;
  }
  SplitRatios r{v[0], v[1], v[2]};
  r.validate();
  return r;
}

/// Uniform integer in [0, bound) from a 64-bit engine by rejection; unlike
/// std::uniform_int_distribution the sequence is the same on every standard
/// library.
inline std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[bounded_random(rng, i)]);
}

/// Assigns val/test1/train by frame. The distinct (video_id, frame) pairs of
/// non-duplicate samples outside test2 are sorted, shuffled with `seed`,
/// and the first round(n*val) go to val, the next round(n*test) to test1,
/// the rest to train. Throws InsufficientDataError for fewer than 3 frames.
inline void split_frames(SampleManifest& manifest, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  using FrameKey = std::pair<std::string, std::int64_t>;
  std::set<FrameKey> distinct;
  for (const auto& r : manifest.rows)
    if (!r.is_duplicate() && r.split != Split::test2) distinct.emplace(r.video_id, r.frame);
  if (distinct.size() < 3)
    throw InsufficientDataError("need at least 3 frames to split, have " + std::to_string(distinct.size()));

  std::vector<FrameKey> frames(distinct.begin(), distinct.end());
  seeded_shuffle(frames, seed);
  const auto n = static_cast<double>(frames.size());
  const auto n_val = static_cast<std::size_t>(std::llround(n * ratios.val));
  const auto n_test = static_cast<std::size_t>(std::llround(n * ratios.test));
  if (n_val + n_test > frames.size()) throw InsufficientDataError("split ratios leave no training frames");

  std::map<FrameKey, Split> assignment;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Split s = i < n_val ? Split::val : (i < n_val + n_test ? Split::test1 : Split::train);
    assignment[frames[i]] = s;
  }
  for (auto& r : manifest.rows) {
    if (r.is_duplicate() || r.split == Split::test2) continue;
    r.split = assignment.at({r.video_id, r.frame});
  }
}

/// Moves every non-duplicate sample of `video_id` into test2.
inline void holdout_video(SampleManifest& manifest, const std::string& video_id) {
  bool found = false;
  for (auto& r : manifest.rows) {
    if (r.video_id != video_id) continue;
    found = true;
    if (!r.is_duplicate()) r.split = Split::test2;
  }
  if (!found) throw NotFoundError("video '" + video_id + "' is not in the manifest");
}

// ---------------------------------------------------------------------------
// Summary

inline nlohmann::json dataset_summary(const SampleManifest& m) {
  nlohmann::json j;
  std::map<std::string, DedupStats> per_video;
  DedupStats total;
  for (const auto& r : m.rows) {
    auto& v = per_video[r.video_id];
    ++v.original;
    ++total.original;
    if (r.is_duplicate()) {
      ++v.deleted;
      ++total.deleted;
    }
  }
  auto stats_json = [](DedupStats s) {
    s.distinct = s.original - s.deleted;
    return nlohmann::json{{"original", s.original}, {"deleted", s.deleted}, {"distinct", s.distinct}};
  };
  j["original"] = total.original;
  j["deleted"] = total.deleted;
  j["distinct"] = total.original - total.deleted;
  j["videos"] = nlohmann::json::object();
  for (const auto& [id, s] : per_video) j["videos"][id] = stats_json(s);

  nlohmann::json splits = nlohmann::json::object();
  for (Split s : {Split::train, Split::val, Split::test1, Split::test2, Split::none}) {
    splits[to_string(s)] = {{"pushing", 0}, {"non-pushing", 0}, {"unknown", 0}};
  }
  for (const auto& r : m.rows) {
    if (r.is_duplicate()) continue;
    auto& cell = splits[to_string(r.split)][to_string(r.label)];
    cell = cell.get<std::size_t>() + 1;
  }
  j["splits"] = splits;
  return j;
}

}  // namespace crowdpush
