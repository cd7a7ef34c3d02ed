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

// Scripted three-video scene used by the pipeline tests and the demo:
// a 4x3 grid of pedestrians drifting through a 6 m x 4 m area, 25 fps,
// ten sampled seconds per video, frames rendered as textured backgrounds
// with one disk per head (red for pushing, blue otherwise).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crowdpush/dataset.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/text.hpp"
#include "crowdpush/trajectory.hpp"

namespace crowdpush::testing {

struct SyntheticScene {
  std::filesystem::path root;
  std::filesystem::path frames_dir;
  std::filesystem::path config;
  std::vector<std::string> video_ids;
  std::vector<std::filesystem::path> trajectories;
  std::vector<std::filesystem::path> ground_truth;
};

inline constexpr int kSceneFps = 25;
inline constexpr int kSceneSeconds = 10;
inline constexpr int kSceneWidth = 320;
inline constexpr int kSceneHeight = 240;
inline constexpr double kPixelsPerMeter = 40.0;
inline constexpr double kOffsetPx = 40.0;

/// Scripted label: one pedestrian in four pushes at any second.
inline bool scripted_pushing(std::int64_t person_id, std::int64_t second, int video) {
  return (person_id + second + video) % 4 == 0;
}

inline double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline SceneConfig synthetic_config() {
  SceneConfig cfg;
  cfg.fps = kSceneFps;
  cfg.r = 1.0;
  cfg.world_to_pixel.m = {kPixelsPerMeter, 0, kOffsetPx, 0, kPixelsPerMeter, kOffsetPx, 0, 0, 1};
  cfg.head_radius_px = 12;
  cfg.crop_size = 64;
  return cfg;
}

/// Positions of every pedestrian at `frame`, one per grid slot.
inline std::vector<TrajectoryRecord> scripted_positions(int video, std::int64_t frame) {
  std::vector<TrajectoryRecord> out;
  std::mt19937_64 rng(1000 + video);
  const double t = static_cast<double>(frame) / kSceneFps;
  std::int64_t id = 1;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col, ++id) {
      const double jx = 0.5 * (unit_random(rng) - 0.5);
      const double jy = 0.5 * (unit_random(rng) - 0.5);
      const double phase = unit_random(rng) * 6.283185307179586;
      const double x = 0.9 + 1.4 * col + jx + 0.25 * std::sin(0.4 * t + phase) + 0.02 * t;
      const double y = 0.8 + 1.2 * row + jy + 0.2 * std::cos(0.3 * t + phase);
      out.push_back({id, frame, x, y});
    }
  }
  return out;
}

inline Image render_frame(int video, std::int64_t frame, const std::vector<TrajectoryRecord>& people,
                          const SceneConfig& cfg) {
  Image img(kSceneWidth, kSceneHeight);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto shade = static_cast<std::uint8_t>(90 + 40 * std::sin(0.07 * x + 0.3 * video) * std::cos(0.05 * y));
      const auto stripe = static_cast<std::uint8_t>(((x / 8 + y / 8 + frame / kSceneFps) % 2) ? 20 : 0);
      img.set(x, y, {static_cast<std::uint8_t>(shade + stripe), shade, static_cast<std::uint8_t>(shade / 2 + 60)});
    }
  }
  for (const auto& p : people) {
    const Point c = cfg.world_to_pixel.apply({p.x, p.y});
    const bool pushing = scripted_pushing(p.person_id, frame / kSceneFps, video);
    const Rgb color = pushing ? Rgb{230, 40, 30} : Rgb{40, 60, 220};
    for (int y = static_cast<int>(c.y) - 9; y <= static_cast<int>(c.y) + 9; ++y)
      for (int x = static_cast<int>(c.x) - 9; x <= static_cast<int>(c.x) + 9; ++x)
        if (img.contains(x, y) && std::hypot(x - c.x, y - c.y) <= 8.0) img.set(x, y, color);
  }
  return img;
}

/// Writes trajectories (with off-second frames that sampling must drop),
/// ground truth, rendered frames and the scene config under `root`.
inline SyntheticScene write_synthetic_scene(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  SyntheticScene scene;
  scene.root = root;
  scene.frames_dir = root / "frames";
  scene.config = root / "scene.json";
  fs::create_directories(scene.frames_dir);
  const auto cfg = synthetic_config();
  text::write_file(scene.config, to_json(cfg).dump(2) + "\n");

  for (int video = 1; video <= 3; ++video) {
    const std::string id = "v" + std::to_string(video);
    std::string traj = "# person_id frame x y\n";
    std::string gt = "person_id,frame,label\n";
    for (std::int64_t frame = 0; frame < kSceneSeconds * kSceneFps; frame += 5) {
      const auto people = scripted_positions(video, frame);
      for (const auto& p : people)
        traj += std::to_string(p.person_id) + ' ' + std::to_string(p.frame) + ' ' + text::format_double(p.x) + ' ' +
                text::format_double(p.y) + '\n';
      if (frame % kSceneFps != 0) continue;
      for (const auto& p : people)
        gt += std::to_string(p.person_id) + ',' + std::to_string(frame) + ',' +
              (scripted_pushing(p.person_id, frame / kSceneFps, video) ? "1" : "0") + '\n';
      write_png(scene.frames_dir / frame_file_name(id, frame), render_frame(video, frame, people, cfg));
    }
    scene.video_ids.push_back(id);
    scene.trajectories.push_back(root / "trajectories" / (id + ".txt"));
    scene.ground_truth.push_back(root / "ground_truth" / (id + ".csv"));
    text::write_file(scene.trajectories.back(), traj);
    text::write_file(scene.ground_truth.back(), gt);
  }
  return scene;
}

}  // namespace crowdpush::testing
