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

// Per-pedestrian local regions: the polygon spanned by a pedestrian's direct
// neighbors (after padding sparse surroundings with dummy points), or a fixed
// square for the static-region ablation, cropped out of the frame image.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdpush/error.hpp"
#include "crowdpush/geometry.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/trajectory.hpp"

namespace crowdpush {

enum class RegionMode { voronoi, square };

inline std::string to_string(RegionMode m) { return m == RegionMode::voronoi ? "voronoi" : "square"; }

inline RegionMode region_mode_from_string(const std::string& s) {
  if (s == "voronoi") return RegionMode::voronoi;
  if (s == "square") return RegionMode::square;
  throw ValidationError("unknown region mode '" + s + "'");
}

/// Appends dummy sites around every real pedestrian. Each pedestrian at
/// (x, y) owns four closed squares of side r spanning from (x, y) to the
/// corners (x-r, y+r), (x+r, y+r), (x+r, y-r), (x-r, y-r), in that order.
/// A square that holds no other real pedestrian gets a dummy at its centre.
/// Dummies never block one another, so the result does not depend on
/// pedestrian order. A dummy that lands on an earlier dummy is dropped.
inline FrameSnapshot generate_dummy_points(const FrameSnapshot& snapshot, double r) {
  if (!(r > 0.0)) throw ValidationError("dummy square size r must be > 0");
  FrameSnapshot out = snapshot;
  std::vector<Point> real;
  for (const auto& p : snapshot.pedestrians) {
    if (p.is_dummy) throw ValidationError("snapshot already contains dummy points");
    real.push_back(p.position);
  }
  const double merge_tol = 1e-9 * r;
  std::vector<Point> dummies;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const Point c = real[i];
    const std::array<Point, 4> corners{{{c.x - r, c.y + r}, {c.x + r, c.y + r}, {c.x + r, c.y - r}, {c.x - r, c.y - r}}};
    for (const Point& corner : corners) {
      const double lo_x = std::min(c.x, corner.x), hi_x = std::max(c.x, corner.x);
      const double lo_y = std::min(c.y, corner.y), hi_y = std::max(c.y, corner.y);
      bool occupied = false;
      for (std::size_t j = 0; j < real.size() && !occupied; ++j) {
        if (j == i) continue;
        const Point q = real[j];
        occupied = q.x >= lo_x && q.x <= hi_x && q.y >= lo_y && q.y <= hi_y;
      }
      if (occupied) continue;
      const Point centre{(c.x + corner.x) / 2.0, (c.y + corner.y) / 2.0};
      const bool merged = std::any_of(dummies.begin(), dummies.end(),
                                      [&](Point d) { return distance(d, centre) <= merge_tol; });
      if (merged) continue;
      dummies.push_back(centre);
      out.pedestrians.push_back({0, centre, true});
    }
  }
  return out;
}

/// Sites of a snapshot in pedestrian order (ordinal = pedestrian index).
inline std::vector<Site> sites_of(const FrameSnapshot& snapshot) {
  std::vector<Site> sites;
  sites.reserve(snapshot.pedestrians.size());
  for (std::size_t i = 0; i < snapshot.pedestrians.size(); ++i) {
    const auto& p = snapshot.pedestrians[i];
    sites.push_back({i, p.person_id, p.position, p.is_dummy});
  }
  return sites;
}

/// 1-based ordinal of each dummy among the dummies of its snapshot (0 for
/// real pedestrians).
inline std::vector<std::size_t> dummy_ordinals(const FrameSnapshot& snapshot) {
  std::vector<std::size_t> out(snapshot.pedestrians.size(), 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < snapshot.pedestrians.size(); ++i)
    if (snapshot.pedestrians[i].is_dummy) out[i] = ++k;
  return out;
}

struct FrameNeighborhood {
  BoundedCellSet cells;
  NeighborGraph graph;
};

/// Bounded Voronoi diagram plus direct neighbors of an augmented snapshot.
inline FrameNeighborhood neighborhood_of(const FrameSnapshot& augmented) {
  FrameNeighborhood out;
  out.cells = bounded_cells(augmented.frame, sites_of(augmented));
  out.graph = direct_neighbors(out.cells);
  return out;
}

/// Polygon through the positions of a pedestrian's direct neighbors, ordered
/// counter-clockwise by atan2 angle around the pedestrian, ties by
/// distance. Throws DegenerateRegionError for fewer than
/// three neighbors.
inline Polygon local_region_polygon(std::int64_t person_id, const FrameSnapshot& augmented,
                                    const NeighborGraph& graph) {
  const std::size_t self = augmented.index_of(person_id);
  if (self == FrameSnapshot::npos)
    throw NotFoundError("person " + std::to_string(person_id) + " not in frame " + std::to_string(augmented.frame));
  if (graph.adjacency.size() != augmented.pedestrians.size())
    throw ValidationError("neighbor graph does not match snapshot");
  const auto& nbrs = graph.adjacency[self];
  if (nbrs.size() < 3) {
    throw DegenerateRegionError("person " + std::to_string(person_id) + " in frame " +
                                std::to_string(augmented.frame) + " has only " + std::to_string(nbrs.size()) +
                                " direct neighbor(s)");
  }
  const Point origin = augmented.pedestrians[self].position;
  struct Keyed {
    double angle;
    double dist;
    Point p;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(nbrs.size());
  for (std::size_t n : nbrs) {
    const Point d = augmented.pedestrians[n].position - origin;
    keyed.push_back({std::atan2(d.y, d.x), norm(d), augmented.pedestrians[n].position});
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const Keyed& a, const Keyed& b) { return a.angle < b.angle || (a.angle == b.angle && a.dist < b.dist); });
  Polygon poly;
  for (const auto& k : keyed) poly.vertices.push_back(k.p);
  return poly;
}

/// Axis-aligned square of the given world side length centred on the
/// pedestrian, counter-clockwise from the lower-left corner.
inline Polygon square_region(std::int64_t person_id, const FrameSnapshot& snapshot, double side_length) {
  if (!(side_length > 0.0)) throw ValidationError("square side length must be > 0");
  const std::size_t self = snapshot.index_of(person_id);
  if (self == FrameSnapshot::npos)
    throw NotFoundError("person " + std::to_string(person_id) + " not in frame " + std::to_string(snapshot.frame));
  const Point c = snapshot.pedestrians[self].position;
  const double h = side_length / 2.0;
  return Polygon{{{c.x - h, c.y - h}, {c.x + h, c.y - h}, {c.x + h, c.y + h}, {c.x - h, c.y + h}}};
}

/// Cuts the polygon's bounding box (clamped to the frame), blacks out pixels
/// outside the polygon unless `mask` is false, and resizes to
/// crop_size x crop_size. Throws OutOfFrameError when the polygon misses the
/// frame entirely.
inline Image crop_region(const Image& frame, std::span<const Point> pixel_polygon, int crop_size, bool mask = true) {
  if (pixel_polygon.size() < 3) throw DegenerateRegionError("crop polygon needs at least 3 vertices");
  if (crop_size < 1) throw ValidationError("crop size must be >= 1");
  const PixelBox box = clamped_bounds(pixel_polygon, frame.width, frame.height);
  if (box.empty()) throw OutOfFrameError("region polygon lies outside the frame");
  const Image cut = cut_polygon(frame, pixel_polygon, box, mask);
  return resize_bilinear(cut, crop_size, crop_size);
}

struct LocalRegion {
  std::int64_t frame = 0;
  std::int64_t person_id = 0;
  Polygon polygon;
  Polygon pixel_polygon;
  Image crop;
};

struct RegionOptions {
  RegionMode mode = RegionMode::voronoi;
  double square_side = 0.6;
  bool mask = true;
};

/// Local regions of every real pedestrian of one sampled frame, in
/// pedestrian order. `snapshot` must hold real pedestrians only.
inline std::vector<LocalRegion> extract_local_regions(const FrameSnapshot& snapshot, const Image& frame,
                                                      const SceneConfig& config, const RegionOptions& options) {
  std::vector<LocalRegion> out;
  if (snapshot.pedestrians.empty()) return out;

  FrameSnapshot augmented;
  FrameNeighborhood hood;
  if (options.mode == RegionMode::voronoi) {
    augmented = generate_dummy_points(snapshot, config.r);
    hood = neighborhood_of(augmented);
  }
  for (const auto& p : snapshot.pedestrians) {
    LocalRegion region;
    region.frame = snapshot.frame;
    region.person_id = p.person_id;
    region.polygon = options.mode == RegionMode::voronoi ? local_region_polygon(p.person_id, augmented, hood.graph)
                                                         : square_region(p.person_id, snapshot, options.square_side);
    region.pixel_polygon = config.world_to_pixel.apply(region.polygon);
    try {
      region.crop = crop_region(frame, region.pixel_polygon.vertices, config.crop_size, options.mask);
    } catch (const OutOfFrameError&) {
      throw OutOfFrameError("frame " + std::to_string(snapshot.frame) + ", person " + std::to_string(p.person_id) +
                            ": local region lies outside the frame image");
    }
    out.push_back(std::move(region));
  }
  return out;
}

}  // namespace crowdpush
