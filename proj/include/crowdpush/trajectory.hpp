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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdpush/error.hpp"
#include "crowdpush/geometry.hpp"
#include "crowdpush/text.hpp"

namespace crowdpush {

/// One row of a trajectory file: `person_id frame x y`.
struct TrajectoryRecord {
  std::int64_t person_id = 0;
  std::int64_t frame = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Site in a per-second snapshot. Dummy points carry person_id 0.
struct Pedestrian {
  std::int64_t person_id = 0;
  Point position;
  bool is_dummy = false;

  friend bool operator==(const Pedestrian&, const Pedestrian&) = default;
};

struct FrameSnapshot {
  std::int64_t frame = 0;
  std::int64_t timestamp_s = 0;
  std::vector<Pedestrian> pedestrians;

  /// Index of the real pedestrian with this id, or npos.
  std::size_t index_of(std::int64_t person_id) const {
    for (std::size_t i = 0; i < pedestrians.size(); ++i)
      if (!pedestrians[i].is_dummy && pedestrians[i].person_id == person_id) return i;
    return npos;
  }

  std::size_t real_count() const {
    std::size_t n = 0;
    for (const auto& p : pedestrians) n += p.is_dummy ? 0 : 1;
    return n;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct SceneConfig {
  int fps = 25;
  double r = 1.0;
  Homography world_to_pixel;
  int head_radius_px = 15;
  int crop_size = 224;

  void validate() const {
    if (fps < 1) throw ValidationError("scene config: fps must be >= 1");
    if (!(r > 0.0)) throw ValidationError("scene config: r must be > 0");
    if (!world_to_pixel.invertible()) throw ValidationError("scene config: world_to_pixel is not invertible");
    if (head_radius_px < 1) throw ValidationError("scene config: head_radius_px must be >= 1");
    if (crop_size < 1) throw ValidationError("scene config: crop_size must be >= 1");
  }
};

inline SceneConfig scene_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scene config must be a JSON object");
  SceneConfig cfg;
  try {
    if (!j.contains("fps")) throw ValidationError("scene config: missing 'fps'");
    cfg.fps = j.at("fps").get<int>();
    if (j.contains("r")) cfg.r = j.at("r").get<double>();
    if (j.contains("world_to_pixel")) {
      const auto& h = j.at("world_to_pixel");
      if (!h.is_array() || h.size() != 9) throw ValidationError("scene config: world_to_pixel needs 9 numbers");
      for (std::size_t i = 0; i < 9; ++i) cfg.world_to_pixel.m[i] = h[i].get<double>();
    }
    if (j.contains("head_radius_px")) cfg.head_radius_px = j.at("head_radius_px").get<int>();
    if (j.contains("crop_size")) cfg.crop_size = j.at("crop_size").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scene config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const SceneConfig& cfg) {
  nlohmann::json j;
  j["fps"] = cfg.fps;
  j["r"] = cfg.r;
  j["world_to_pixel"] = cfg.world_to_pixel.m;
  j["head_radius_px"] = cfg.head_radius_px;
  j["crop_size"] = cfg.crop_size;
  return j;
}

inline SceneConfig load_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return scene_config_from_json(j);
}

namespace detail {

// Fields are separated by a run of whitespace or by a single comma
// (optionally surrounded by whitespace).
inline bool split_record_fields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n && is_space(line[i])) ++i;
  if (i < n && line[i] == ',') return false;
  while (i < n) {
    const std::size_t start = i;
    while (i < n && !is_space(line[i]) && line[i] != ',') ++i;
    out.push_back(line.substr(start, i - start));
    int commas = 0;
    while (i < n && (is_space(line[i]) || line[i] == ',')) {
      if (line[i] == ',') ++commas;
      ++i;
    }
    if (commas > 1) return false;
    if (commas == 1 && i == n) return false;
  }
  return true;
}

}  // namespace detail

/// Parses `person_id frame x y` records. Lines starting with '#' and blank
/// lines are skipped. Throws ParseError or DuplicateRecordError (both carry
/// the 1-based line number).
inline std::vector<TrajectoryRecord> parse_trajectories(std::istream& in) {
  std::vector<TrajectoryRecord> records;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!detail::split_record_fields(body, fields)) throw ParseError(line_no, "empty field");
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    const auto id = text::parse_int<std::int64_t>(fields[0]);
    const auto frame = text::parse_int<std::int64_t>(fields[1]);
    const auto x = text::parse_double(fields[2]);
    const auto y = text::parse_double(fields[3]);
    if (!id || !frame || !x || !y) throw ParseError(line_no, "non-numeric field");
    if (*id < 1) throw ParseError(line_no, "person_id must be >= 1");
    if (*frame < 0) throw ParseError(line_no, "frame must be >= 0");
    if (!seen.emplace(*id, *frame).second) {
      throw DuplicateRecordError("line " + std::to_string(line_no) + ": duplicate record for person " +
                                 std::to_string(*id) + " at frame " + std::to_string(*frame));
    }
    records.push_back({*id, *frame, *x, *y});
  }
  return records;
}

inline std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse_trajectories(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline std::string format_trajectories(std::span<const TrajectoryRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.person_id) + ' ' + std::to_string(r.frame) + ' ' + text::format_double(r.x) + ' ' +
           text::format_double(r.y) + '\n';
  }
  return out;
}

/// Keeps the records whose frame is a multiple of fps and groups them into
/// snapshots ordered by frame. Pedestrians keep file order within a frame.
inline std::vector<FrameSnapshot> sample_snapshots(std::span<const TrajectoryRecord> records,
                                                   const SceneConfig& config) {
  if (config.fps < 1) throw ValidationError("fps must be >= 1");
  std::map<std::int64_t, FrameSnapshot> by_frame;
  for (const auto& r : records) {
    if (r.frame % config.fps != 0) continue;
    auto& snap = by_frame[r.frame];
    snap.frame = r.frame;
    snap.timestamp_s = r.frame / config.fps;
    snap.pedestrians.push_back({r.person_id, {r.x, r.y}, false});
  }
  std::vector<FrameSnapshot> out;
  out.reserve(by_frame.size());
  for (auto& [frame, snap] : by_frame) out.push_back(std::move(snap));
  return out;
}

}  // namespace crowdpush
