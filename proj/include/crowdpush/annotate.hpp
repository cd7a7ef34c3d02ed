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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdpush/dataset.hpp"
#include "crowdpush/error.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/parallel.hpp"
#include "crowdpush/text.hpp"
#include "crowdpush/trajectory.hpp"

namespace crowdpush {

inline constexpr Rgb kPushingColor{255, 0, 0};
inline constexpr Rgb kNonPushingColor{0, 255, 0};
inline constexpr double kStrokeWidth = 2.0;

/// Paints the annulus |d - radius| <= stroke/2 around `centre`.
inline void draw_ring(Image& image, Point centre, double radius, double stroke, Rgb color) {
  const double half = stroke / 2.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(centre.x - radius - half)));
  const int x1 = std::min(image.width - 1, static_cast<int>(std::ceil(centre.x + radius + half)));
  const int y0 = std::max(0, static_cast<int>(std::floor(centre.y - radius - half)));
  const int y1 = std::min(image.height - 1, static_cast<int>(std::ceil(centre.y + radius + half)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - centre.x, y - centre.y);
      if (std::abs(d - radius) <= half) image.set(x, y, color);
    }
  }
}

/// Per-person predictions of one frame.
using FramePredictions = std::map<std::int64_t, Label>;

struct AnnotateOptions {
  bool mark_nonpushing = false;
};

struct AnnotatedFrame {
  Image image;
  std::size_t pushing_count = 0;
  std::size_t total = 0;
  std::size_t skipped = 0;  // markers whose centre fell outside the frame
};

/// Draws a red ring around every pushing pedestrian (green rings for the
/// others when requested). Throws ValidationError when a real pedestrian
/// has no prediction.
inline AnnotatedFrame annotate_frame(const Image& frame, const FrameSnapshot& snapshot,
                                     const FramePredictions& predictions, const SceneConfig& config,
                                     const AnnotateOptions& options = {}) {
  AnnotatedFrame out;
  out.image = frame;
  for (const auto& p : snapshot.pedestrians) {
    if (p.is_dummy) continue;
    const auto it = predictions.find(p.person_id);
    if (it == predictions.end() || it->second == Label::unknown) {
      throw ValidationError("no prediction for person " + std::to_string(p.person_id) + " in frame " +
                            std::to_string(snapshot.frame));
    }
    ++out.total;
    const bool pushing = it->second == Label::pushing;
    if (pushing) ++out.pushing_count;
    if (!pushing && !options.mark_nonpushing) continue;
    const Point c = config.world_to_pixel.apply(p.position);
    if (!(c.x >= 0.0 && c.y >= 0.0 && c.x < frame.width && c.y < frame.height)) {
      ++out.skipped;
      continue;
    }
    draw_ring(out.image, c, config.head_radius_px, kStrokeWidth, pushing ? kPushingColor : kNonPushingColor);
  }
  return out;
}

struct FrameSummary {
  std::int64_t frame = 0;
  std::size_t pushing_count = 0;
  std::size_t total = 0;
};

struct SequenceSummary {
  std::vector<FrameSummary> frames;
  std::size_t skipped = 0;
};

inline nlohmann::json to_json(const SequenceSummary& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : s.frames) arr.push_back({{"frame", f.frame}, {"pushing_count", f.pushing_count}, {"total", f.total}});
  return arr;
}

/// `<video_id>_<frame:06>_annotated.png`
inline std::string annotated_file_name(const std::string& video_id, std::int64_t frame) {
  return video_id + "_" + text::zero_pad(frame, 6) + "_annotated.png";
}

/// Annotates every sampled frame of one video. `predictions` is keyed by
/// frame. Frames without markers are copied byte for byte. Throws IoError
/// when a frame image is missing.
inline SequenceSummary annotate_sequence(const std::filesystem::path& frames_dir, const std::string& video_id,
                                         std::span<const FrameSnapshot> snapshots,
                                         const std::map<std::int64_t, FramePredictions>& predictions,
                                         const std::filesystem::path& out_dir, const SceneConfig& config,
                                         const AnnotateOptions& options = {}, std::size_t jobs = 1) {
  for (const auto& s : snapshots) {
    const auto path = frames_dir / frame_file_name(video_id, s.frame);
    if (!std::filesystem::exists(path)) throw IoError("missing frame image " + path.string());
  }
  std::filesystem::create_directories(out_dir);
  SequenceSummary summary;
  summary.frames.resize(snapshots.size());
  std::vector<std::size_t> skipped(snapshots.size(), 0);
  static const FramePredictions kNone;
  parallel_for(snapshots.size(), jobs, [&](std::size_t i) {
    const auto& s = snapshots[i];
    const auto frame = read_png(frames_dir / frame_file_name(video_id, s.frame));
    const auto it = predictions.find(s.frame);
    const auto annotated = annotate_frame(frame, s, it == predictions.end() ? kNone : it->second, config, options);
    const auto target = out_dir / annotated_file_name(video_id, s.frame);
    if (annotated.image == frame) {
      std::filesystem::copy_file(frames_dir / frame_file_name(video_id, s.frame), target,
                                 std::filesystem::copy_options::overwrite_existing);
    } else {
      write_png(target, annotated.image);
    }
    summary.frames[i] = {s.frame, annotated.pushing_count, annotated.total};
    skipped[i] = annotated.skipped;
  });
  for (std::size_t k : skipped) summary.skipped += k;
  return summary;
}

}  // namespace crowdpush
