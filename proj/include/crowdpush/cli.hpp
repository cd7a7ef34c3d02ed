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

// `crowdpush` command line. Exit codes: 0 success, 1 usage or validation
// error, 2 I/O error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdpush/error.hpp"
#include "crowdpush/pipeline.hpp"

namespace crowdpush::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

namespace detail {

inline std::vector<pipeline::VideoInput> videos(const std::vector<std::string>& args) {
  std::vector<pipeline::VideoInput> out;
  for (const auto& s : args) out.push_back(pipeline::VideoInput::parse(s));
  return out;
}

inline std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace detail

/// Runs the CLI with explicit streams so tests can capture output.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace pl = pipeline;
  CLI::App app{"Microscopic pushing detection in top-view crowd recordings"};
  app.require_subcommand(1);
  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for per-frame and per-sample stages")->check(CLI::PositiveNumber);

  // Shared option storage.
  std::vector<std::string> trajectories, ground_truth;
  std::string frames_dir, config_path, out_path, manifest, scores, model, score_file, embeddings, crops_root,
      summary, threshold_file, split_name = "test1", mode = "voronoi", ratios = "0.70,0.15,0.15";
  std::vector<std::string> holdout;
  double tau = 0.97, square_side = 0.6, threshold = -1.0;
  std::uint64_t seed = 42;
  bool no_mask = false, mark_nonpushing = false;

  auto add_region_flags = [&](CLI::App* c) {
    c->add_option("--mode", mode, "Local region shape")->check(CLI::IsMember({"voronoi", "square"}));
    c->add_option("--square-side", square_side, "Square side in world units (square mode)");
    c->add_flag("--no-mask", no_mask, "Keep pixels outside the region polygon");
  };

  auto* regions = app.add_subcommand("regions", "Extract local-region crops, manifest and neighbor files");
  regions->add_option("--trajectories", trajectories, "Trajectory file(s), `path` or `video_id=path`")->required();
  regions->add_option("--frames-dir", frames_dir, "Directory of <video_id>_<frame:06>.png images")->required();
  regions->add_option("--config", config_path, "Scene config JSON")->required();
  regions->add_option("--out", out_path, "Output directory")->required();
  add_region_flags(regions);

  auto* label = app.add_subcommand("label", "Attach ground-truth labels to a manifest");
  label->add_option("--manifest", manifest)->required();
  label->add_option("--ground-truth", ground_truth, "Ground-truth CSV(s), `path` or `video_id=path`")->required();
  label->add_option("--out", out_path)->required();

  auto* dedup = app.add_subcommand("dedup", "Mark near-duplicate samples");
  dedup->add_option("--manifest", manifest)->required();
  dedup->add_option("--out", out_path)->required();
  dedup->add_option("--tau", tau, "Cosine similarity threshold")->check(CLI::Range(0.0, 1.0));
  dedup->add_option("--embeddings", embeddings, "CSV sample_id,e1..ek replacing the built-in descriptor");
  dedup->add_option("--crops-root", crops_root);

  auto* split = app.add_subcommand("split", "Assign train/val/test splits by frame");
  split->add_option("--manifest", manifest)->required();
  split->add_option("--out", out_path)->required();
  split->add_option("--ratios", ratios, "train,val,test");
  split->add_option("--seed", seed);
  split->add_option("--holdout-video", holdout, "Video(s) reserved for test2");
  split->add_option("--summary", summary, "Write dataset summary JSON");

  auto* train = app.add_subcommand("train-baseline", "Train the logistic baseline on the train split");
  train->add_option("--manifest", manifest)->required();
  train->add_option("--out", out_path)->required();
  train->add_option("--seed", seed);
  train->add_option("--crops-root", crops_root);

  auto* score_cmd = app.add_subcommand("score", "Score every manifest sample");
  score_cmd->add_option("--manifest", manifest)->required();
  auto* model_opt = score_cmd->add_option("--model", model, "Baseline model JSON");
  auto* file_opt = score_cmd->add_option("--score-file", score_file, "External scores CSV sample_id,delta");
  model_opt->excludes(file_opt);
  score_cmd->add_option("--out", out_path)->required();
  score_cmd->add_option("--crops-root", crops_root);

  auto* tune = app.add_subcommand("tune-threshold", "Pick the threshold balancing TPR and TNPR on the val split");
  tune->add_option("--manifest", manifest)->required();
  tune->add_option("--scores", scores)->required();
  tune->add_option("--out", out_path, "Write threshold JSON");

  auto* eval = app.add_subcommand("evaluate", "Report TPR, TNPR, macro accuracy and AUC for one split");
  eval->add_option("--manifest", manifest)->required();
  eval->add_option("--scores", scores)->required();
  eval->add_option("--split", split_name)->check(CLI::IsMember({"train", "val", "test1", "test2"}));
  auto* thr_opt = eval->add_option("--threshold", threshold);
  auto* thr_file_opt = eval->add_option("--threshold-file", threshold_file);
  thr_opt->excludes(thr_file_opt);
  eval->add_option("--out", out_path, "Write the report here instead of standard output");

  auto* annotate = app.add_subcommand("annotate", "Draw pushing markers on the sampled frames");
  annotate->add_option("--trajectories", trajectories)->required();
  annotate->add_option("--frames-dir", frames_dir)->required();
  annotate->add_option("--config", config_path)->required();
  annotate->add_option("--scores", scores)->required();
  auto* ann_thr = annotate->add_option("--threshold", threshold);
  auto* ann_thr_file = annotate->add_option("--threshold-file", threshold_file);
  ann_thr->excludes(ann_thr_file);
  annotate->add_option("--out", out_path)->required();
  annotate->add_flag("--mark-nonpushing", mark_nonpushing, "Also circle non-pushing pedestrians in green");

  auto* all = app.add_subcommand("pipeline", "Run every stage into one output directory");
  all->add_option("--trajectories", trajectories)->required();
  all->add_option("--frames-dir", frames_dir)->required();
  all->add_option("--config", config_path)->required();
  all->add_option("--ground-truth", ground_truth)->required();
  all->add_option("--out", out_path)->required();
  all->add_option("--tau", tau)->check(CLI::Range(0.0, 1.0));
  all->add_option("--ratios", ratios);
  all->add_option("--seed", seed);
  all->add_option("--holdout-video", holdout);
  all->add_option("--score-file", score_file);
  all->add_option("--embeddings", embeddings);
  all->add_flag("--mark-nonpushing", mark_nonpushing);
  add_region_flags(all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  auto resolve_threshold = [&]() {
    if (!threshold_file.empty()) return pl::load_threshold(threshold_file);
    if (threshold < 0.0) throw ValidationError("give --threshold or --threshold-file");
    return threshold;
  };
  auto region_options = [&]() {
    RegionOptions o;
    o.mode = region_mode_from_string(mode);
    o.square_side = square_side;
    o.mask = !no_mask;
    return o;
  };

  try {
    if (regions->parsed()) {
      const auto r = pl::run_regions(detail::videos(trajectories), frames_dir, load_scene_config(config_path),
                                     region_options(), out_path, jobs);
      err << "regions: " << r.rows.size() << " samples from " << r.frames << " frames\n";
    } else if (label->parsed()) {
      const auto s = pl::run_label(manifest, detail::videos(ground_truth), out_path);
      err << "label: " << s.pushing << " pushing, " << s.non_pushing << " non-pushing, " << s.unknown
          << " unknown, " << s.unmatched_ground_truth << " ground-truth entries without a sample\n";
    } else if (dedup->parsed()) {
      const auto s = pl::run_dedup(manifest, out_path, tau, detail::opt_path(embeddings), detail::opt_path(crops_root), jobs);
      err << "dedup: original " << s.original << ", deleted " << s.deleted << ", distinct " << s.distinct << "\n";
    } else if (split->parsed()) {
      pl::SplitOptions o;
      o.ratios = parse_ratios(ratios);
      o.seed = seed;
      o.holdout_videos = holdout;
      const auto s = pl::run_split(manifest, out_path, o, detail::opt_path(summary));
      err << "split: " << s["splits"].dump() << "\n";
    } else if (train->parsed()) {
      pl::run_train_baseline(manifest, out_path, seed, detail::opt_path(crops_root), jobs);
    } else if (score_cmd->parsed()) {
      pl::run_score(manifest, detail::opt_path(model), detail::opt_path(score_file), out_path,
                    detail::opt_path(crops_root), jobs);
    } else if (tune->parsed()) {
      const auto c = pl::run_tune_threshold(manifest, scores, detail::opt_path(out_path));
      out << pl::dump(to_json(c));
    } else if (eval->parsed()) {
      const auto split_value = split_from_string(split_name);
      const auto report = pl::run_evaluate(manifest, scores, split_value, resolve_threshold());
      if (out_path.empty()) {
        out << pl::dump(to_json(report));
      } else {
        text::write_file(out_path, pl::dump(to_json(report)));
      }
      err << table_row(report, split_name) << "\n";
    } else if (annotate->parsed()) {
      pl::AnnotateStageOptions o;
      o.annotate.mark_nonpushing = mark_nonpushing;
      o.threshold = resolve_threshold();
      const auto result = pl::run_annotate(detail::videos(trajectories), frames_dir, load_scene_config(config_path),
                                           scores, o, out_path, jobs);
      for (const auto& [video, s] : result)
        err << "annotate " << video << ": " << s.frames.size() << " frames, " << s.skipped
            << " marker(s) outside the frame\n";
    } else if (all->parsed()) {
      pl::PipelineOptions o;
      o.trajectories = detail::videos(trajectories);
      o.ground_truth = detail::videos(ground_truth);
      o.frames_dir = frames_dir;
      o.config = load_scene_config(config_path);
      o.regions = region_options();
      o.tau = tau;
      o.split.ratios = parse_ratios(ratios);
      o.split.seed = seed;
      o.split.holdout_videos = holdout;
      o.score_file = detail::opt_path(score_file);
      o.embeddings = detail::opt_path(embeddings);
      o.annotate.mark_nonpushing = mark_nonpushing;
      o.jobs = jobs;
      pl::run_pipeline(o, out_path, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace crowdpush::cli
