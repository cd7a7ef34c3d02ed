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

// File-level batch stages. Each stage reads and writes the on-disk formats,
// so running the stages one by one and running `run_pipeline` produce the
// same bytes.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdpush/annotate.hpp"
#include "crowdpush/classifier.hpp"
#include "crowdpush/dataset.hpp"
#include "crowdpush/error.hpp"
#include "crowdpush/evaluation.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/parallel.hpp"
#include "crowdpush/region.hpp"
#include "crowdpush/text.hpp"
#include "crowdpush/trajectory.hpp"

namespace crowdpush::pipeline {

namespace fs = std::filesystem;

/// A per-video input file. Written as `path` (video id = file stem) or
/// `video_id=path`.
struct VideoInput {
  std::string video_id;
  fs::path path;

  static VideoInput parse(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
    const fs::path p(arg);
    return {p.stem().string(), p};
  }
};

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// regions

struct RegionsResult {
  std::vector<RegionRow> rows;
  std::size_t frames = 0;
};

/// One neighbor-file row; dummy neighbors print as `0.k`.
struct NeighborRow {
  std::int64_t frame;
  std::int64_t person_id;
  std::int64_t neighbor_id;
  std::size_t dummy_ordinal;  // 0 for real neighbors

  auto key() const { return std::tie(frame, person_id, neighbor_id, dummy_ordinal); }
};

inline std::string format_neighbors(std::vector<NeighborRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const NeighborRow& a, const NeighborRow& b) { return a.key() < b.key(); });
  std::string out = "frame,person_id,neighbor_person_id\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame) + ',' + std::to_string(r.person_id) + ',';
    out += r.dummy_ordinal ? "0." + std::to_string(r.dummy_ordinal) : std::to_string(r.neighbor_id);
    out += '\n';
  }
  return out;
}

/// Direct-neighbor rows of the real pedestrians of one augmented snapshot.
inline std::vector<NeighborRow> neighbor_rows(const FrameSnapshot& augmented, const NeighborGraph& graph) {
  std::vector<NeighborRow> rows;
  const auto ordinals = dummy_ordinals(augmented);
  for (std::size_t i = 0; i < augmented.pedestrians.size(); ++i) {
    const auto& p = augmented.pedestrians[i];
    if (p.is_dummy) continue;
    for (std::size_t j : graph.adjacency[i]) {
      const auto& q = augmented.pedestrians[j];
      rows.push_back({augmented.frame, p.person_id, q.person_id, ordinals[j]});
    }
  }
  return rows;
}

/// Extracts and crops the local region of every real pedestrian in every
/// sampled frame. Writes `crops/<sample_id>.png`, `regions.csv` and, in
/// voronoi mode, `neighbors_<video_id>.csv` under `out_dir`.
inline RegionsResult run_regions(const std::vector<VideoInput>& videos, const fs::path& frames_dir,
                                 const SceneConfig& config, const RegionOptions& options, const fs::path& out_dir,
                                 std::size_t jobs) {
  config.validate();
  fs::create_directories(out_dir / "crops");
  RegionsResult result;
  std::set<std::string> seen_ids;
  for (const auto& video : videos) {
    if (!seen_ids.insert(video.video_id).second)
      throw ValidationError("video id '" + video.video_id + "' given twice");
    const auto records = load_trajectories(video.path);
    const auto snapshots = sample_snapshots(records, config);
    for (const auto& s : snapshots) {
      const auto path = frames_dir / frame_file_name(video.video_id, s.frame);
      if (!fs::exists(path)) throw IoError("missing frame image " + path.string());
    }
    std::vector<std::vector<RegionRow>> per_frame_rows(snapshots.size());
    std::vector<std::vector<NeighborRow>> per_frame_neighbors(snapshots.size());
    parallel_for(snapshots.size(), jobs, [&](std::size_t f) {
      const auto& snap = snapshots[f];
      const auto frame = read_png(frames_dir / frame_file_name(video.video_id, snap.frame));
      const auto regions = extract_local_regions(snap, frame, config, options);
      for (const auto& region : regions) {
        RegionRow row;
        row.sample_id = sample_id(video.video_id, region.frame, region.person_id);
        row.video_id = video.video_id;
        row.frame = region.frame;
        row.person_id = region.person_id;
        row.path = "crops/" + row.sample_id + ".png";
        row.mode = options.mode;
        write_png(out_dir / row.path, region.crop);
        per_frame_rows[f].push_back(std::move(row));
      }
      if (options.mode == RegionMode::voronoi && !snap.pedestrians.empty()) {
        const auto augmented = generate_dummy_points(snap, config.r);
        const auto hood = neighborhood_of(augmented);
        per_frame_neighbors[f] = neighbor_rows(augmented, hood.graph);
      }
    });
    std::vector<NeighborRow> neighbors;
    for (std::size_t f = 0; f < snapshots.size(); ++f) {
      for (auto& r : per_frame_rows[f]) result.rows.push_back(std::move(r));
      neighbors.insert(neighbors.end(), per_frame_neighbors[f].begin(), per_frame_neighbors[f].end());
    }
    if (options.mode == RegionMode::voronoi)
      text::write_file(out_dir / ("neighbors_" + video.video_id + ".csv"), format_neighbors(std::move(neighbors)));
    result.frames += snapshots.size();
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const RegionRow& a, const RegionRow& b) { return a.sample_id < b.sample_id; });
  text::write_file(out_dir / "regions.csv", format_region_manifest(result.rows));
  return result;
}

// ---------------------------------------------------------------------------
// dataset stages

inline LabelSummary run_label(const fs::path& manifest_in, const std::vector<VideoInput>& ground_truth,
                              const fs::path& manifest_out) {
  auto manifest = load_manifest(manifest_in);
  GroundTruth gt;
  for (const auto& g : ground_truth) load_ground_truth(g.path, g.video_id, gt);
  const auto summary = label_samples(manifest, gt);
  text::write_file(manifest_out, format_manifest(manifest));
  return summary;
}

/// Crop files resolve against `crops_root`, or the manifest's directory.
inline fs::path crop_base(const fs::path& manifest_path, const std::optional<fs::path>& crops_root) {
  if (crops_root) return *crops_root;
  return manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
}

inline FeatureSource feature_source(const fs::path& manifest_path, const std::optional<fs::path>& crops_root,
                                    const std::optional<fs::path>& embeddings) {
  if (embeddings) return embedding_features(load_embeddings(*embeddings));
  return crop_features(crop_base(manifest_path, crops_root));
}

inline DedupStats run_dedup(const fs::path& manifest_in, const fs::path& manifest_out, double tau,
                            const std::optional<fs::path>& embeddings, const std::optional<fs::path>& crops_root,
                            std::size_t jobs) {
  auto manifest = load_manifest(manifest_in);
  const auto stats = deduplicate(manifest, tau, feature_source(manifest_in, crops_root, embeddings), jobs);
  text::write_file(manifest_out, format_manifest(manifest));
  return stats;
}

struct SplitOptions {
  SplitRatios ratios;
  std::uint64_t seed = 42;
  std::vector<std::string> holdout_videos;
};

inline nlohmann::json run_split(const fs::path& manifest_in, const fs::path& manifest_out,
                                const SplitOptions& options, const std::optional<fs::path>& summary_out) {
  auto manifest = load_manifest(manifest_in);
  for (const auto& v : options.holdout_videos) holdout_video(manifest, v);
  split_frames(manifest, options.ratios, options.seed);
  text::write_file(manifest_out, format_manifest(manifest));
  auto summary = dataset_summary(manifest);
  if (summary_out) text::write_file(*summary_out, dump(summary));
  return summary;
}

// ---------------------------------------------------------------------------
// classifier stages

inline BaselineModel run_train_baseline(const fs::path& manifest_in, const fs::path& model_out, std::uint64_t seed,
                                        const std::optional<fs::path>& crops_root, std::size_t jobs) {
  const auto manifest = load_manifest(manifest_in);
  const auto model = train_baseline(manifest, crop_features(crop_base(manifest_in, crops_root)), seed, jobs);
  text::write_file(model_out, dump(to_json(model)));
  return model;
}

inline ScoreSet run_score(const fs::path& manifest_in, const std::optional<fs::path>& model_path,
                          const std::optional<fs::path>& score_file, const fs::path& scores_out,
                          const std::optional<fs::path>& crops_root, std::size_t jobs) {
  if (model_path.has_value() == score_file.has_value())
    throw ValidationError("score needs exactly one of --model or --score-file");
  const auto manifest = load_manifest(manifest_in);
  const ScoreSet scores =
      model_path ? score(manifest, load_model(*model_path), crop_features(crop_base(manifest_in, crops_root)), jobs)
                 : score(manifest, load_scores(*score_file));
  validate(scores);
  text::write_file(scores_out, format_scores(scores));
  return scores;
}

// ---------------------------------------------------------------------------
// evaluation stages

/// Tunes the threshold on the validation split only.
inline ThresholdChoice run_tune_threshold(const fs::path& manifest_in, const fs::path& scores_in,
                                          const std::optional<fs::path>& out) {
  const auto manifest = load_manifest(manifest_in);
  const auto data = select_split(manifest, load_scores(scores_in), Split::val);
  if (data.scores.empty()) throw InsufficientDataError("validation split has no labeled samples");
  const auto choice = optimal_threshold(data.scores, data.labels);
  if (out) text::write_file(*out, dump(to_json(choice)));
  return choice;
}

inline double load_threshold(const fs::path& path) {
  try {
    const auto j = nlohmann::json::parse(text::read_file(path));
    return j.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline EvalReport run_evaluate(const fs::path& manifest_in, const fs::path& scores_in, Split split, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must be in [0, 1]");
  const auto manifest = load_manifest(manifest_in);
  const auto data = select_split(manifest, load_scores(scores_in), split);
  if (data.scores.empty()) throw InsufficientDataError("split " + to_string(split) + " has no labeled samples");
  return evaluate(data.scores, data.labels, threshold);
}

// ---------------------------------------------------------------------------
// annotate

struct AnnotateStageOptions {
  AnnotateOptions annotate;
  double threshold = 0.5;
};

/// Annotates every sampled frame of every video. Each real pedestrian is
/// classified from the score of its sample id. Writes
/// `<video_id>_<frame>_annotated.png` and `<video_id>_summary.json`.
inline std::map<std::string, SequenceSummary> run_annotate(const std::vector<VideoInput>& videos,
                                                           const fs::path& frames_dir, const SceneConfig& config,
                                                           const fs::path& scores_in,
                                                           const AnnotateStageOptions& options,
                                                           const fs::path& out_dir, std::size_t jobs) {
  config.validate();
  const auto scores = load_scores(scores_in).by_id();
  std::map<std::string, SequenceSummary> out;
  for (const auto& video : videos) {
    const auto snapshots = sample_snapshots(load_trajectories(video.path), config);
    std::map<std::int64_t, FramePredictions> predictions;
    std::vector<std::string> missing;
    for (const auto& s : snapshots) {
      for (const auto& p : s.pedestrians) {
        const auto id = sample_id(video.video_id, s.frame, p.person_id);
        const auto it = scores.find(id);
        if (it == scores.end()) {
          missing.push_back(id);
          continue;
        }
        predictions[s.frame][p.person_id] = classify(it->second, options.threshold);
      }
    }
    if (!missing.empty()) throw CoverageError(std::move(missing));
    auto summary = annotate_sequence(frames_dir, video.video_id, snapshots, predictions, out_dir, config,
                                     options.annotate, jobs);
    text::write_file(out_dir / (video.video_id + "_summary.json"), dump(to_json(summary)));
    out.emplace(video.video_id, std::move(summary));
  }
  return out;
}

// ---------------------------------------------------------------------------
// everything

struct PipelineOptions {
  std::vector<VideoInput> trajectories;
  std::vector<VideoInput> ground_truth;
  fs::path frames_dir;
  SceneConfig config;
  RegionOptions regions;
  double tau = 0.97;
  SplitOptions split;
  std::optional<fs::path> score_file;  // replaces the baseline model when set
  std::optional<fs::path> embeddings;
  AnnotateOptions annotate;
  std::size_t jobs = 1;
};

/// Fixed file names used by `run_pipeline`; the staged CLI reproduces them.
struct PipelineLayout {
  fs::path root;
  fs::path regions() const { return root / "regions.csv"; }
  fs::path labeled() const { return root / "labeled.csv"; }
  fs::path deduped() const { return root / "dedup.csv"; }
  fs::path split() const { return root / "split.csv"; }
  fs::path summary() const { return root / "summary.json"; }
  fs::path model() const { return root / "model.json"; }
  fs::path scores() const { return root / "scores.csv"; }
  fs::path threshold() const { return root / "threshold.json"; }
  fs::path eval(Split s) const { return root / ("eval_" + to_string(s) + ".json"); }
  fs::path annotated() const { return root / "annotated"; }
};

/// True when a split holds labeled samples of both classes.
inline bool evaluable(const SampleManifest& m, Split split) {
  bool pos = false, neg = false;
  for (const auto& r : m.rows) {
    if (r.split != split || r.is_duplicate()) continue;
    pos |= r.label == Label::pushing;
    neg |= r.label == Label::non_pushing;
  }
  return pos && neg;
}

inline void run_pipeline(const PipelineOptions& o, const fs::path& out_dir, std::ostream& log) {
  const PipelineLayout at{out_dir};
  const auto regions = run_regions(o.trajectories, o.frames_dir, o.config, o.regions, out_dir, o.jobs);
  log << "regions: " << regions.rows.size() << " samples from " << regions.frames << " frames\n";
  const auto labels = run_label(at.regions(), o.ground_truth, at.labeled());
  log << "label: " << labels.pushing << " pushing, " << labels.non_pushing << " non-pushing, " << labels.unknown
      << " unknown\n";
  const auto dedup = run_dedup(at.labeled(), at.deduped(), o.tau, o.embeddings, std::nullopt, o.jobs);
  log << "dedup: " << dedup.deleted << " of " << dedup.original << " removed\n";
  run_split(at.deduped(), at.split(), o.split, at.summary());
  if (o.score_file) {
    run_score(at.split(), std::nullopt, o.score_file, at.scores(), std::nullopt, o.jobs);
  } else {
    run_train_baseline(at.split(), at.model(), o.split.seed, std::nullopt, o.jobs);
    run_score(at.split(), at.model(), std::nullopt, at.scores(), std::nullopt, o.jobs);
  }
  const auto choice = run_tune_threshold(at.split(), at.scores(), at.threshold());
  log << "threshold: " << choice.threshold << "\n";
  const auto manifest = load_manifest(at.split());
  for (Split s : {Split::test1, Split::test2}) {
    if (!evaluable(manifest, s)) continue;
    const auto report = run_evaluate(at.split(), at.scores(), s, choice.threshold);
    text::write_file(at.eval(s), dump(to_json(report)));
    log << table_row(report, to_string(s)) << "\n";
  }
  run_annotate(o.trajectories, o.frames_dir, o.config, at.scores(),
               {o.annotate, choice.threshold}, at.annotated(), o.jobs);
}

}  // namespace crowdpush::pipeline
