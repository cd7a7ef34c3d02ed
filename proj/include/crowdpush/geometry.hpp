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

// Planar geometry for per-frame neighbor detection: convex hulls, Voronoi
// cells bounded by the hull of all sites, and the direct-neighbor relation
// between sites whose bounded cells share an edge.
//
// Cells are built constructively: the cell of site s is the hull clipped by
// the half-plane {x : |x - s| <= |x - q|} of every other site q. Each edge of
// a clipped cell remembers which constraint produced it, so adjacency falls
// out of the construction without matching floating-point vertices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crowdpush/error.hpp"

namespace crowdpush {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Twice the signed area of triangle (o, a, b); positive when counter-clockwise.
inline double orient(Point o, Point a, Point b) { return cross(a - o, b - o); }

/// Closed polygon. Vertices are stored once (no repeated closing vertex).
struct Polygon {
  std::vector<Point> vertices;

  std::size_t size() const { return vertices.size(); }
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

inline double signed_area(std::span<const Point> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return 0.0;
  // Shoelace relative to the first vertex keeps cancellation small.
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) twice += orient(vertices[0], vertices[i], vertices[i + 1]);
  return 0.5 * twice;
}

inline double signed_area(const Polygon& p) { return signed_area(std::span<const Point>(p.vertices)); }

/// True when every turn has the same (non-negative) orientation.
inline bool is_convex_ccw(std::span<const Point> v, double tol = 0.0) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (orient(v[i], v[(i + 1) % n], v[(i + 2) % n]) < -tol) return false;
  }
  return signed_area(v) > 0.0;
}

/// Largest pairwise distance. Quadratic; inputs are per-frame site sets.
inline double diameter(std::span<const Point> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, distance(pts[i], pts[j]));
  return best;
}

enum class Containment { outside, boundary, inside };

/// Point-in-polygon for any simple polygon (either orientation). Points
/// within `tol` of an edge report `boundary`.
inline Containment locate(std::span<const Point> poly, Point p, double tol = 1e-12) {
  const std::size_t n = poly.size();
  if (n < 3) return Containment::outside;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[j];
    const Point b = poly[i];
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (distance(a + t * ab, p) <= tol) return Containment::boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside ? Containment::inside : Containment::outside;
}

/// Convex hull by Andrew's monotone chain. Counter-clockwise, starting at the
/// lowest-x (then lowest-y) point; collinear boundary points are dropped.
/// Throws DegenerateGeometryError for fewer than 3 distinct points or when all
/// points are collinear.
inline Polygon convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw DegenerateGeometryError("convex hull needs at least 3 distinct points");

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point p = pts[i];
    while (k >= lower && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateGeometryError("convex hull of collinear points");
  return Polygon{std::move(hull)};
}

/// Marks an edge that came from the hull rather than from a bisector.
inline constexpr std::size_t kHullEdge = std::numeric_limits<std::size_t>::max();

/// Convex polygon whose edge k (vertex k to vertex k+1) records its source:
/// the ordinal of the site whose bisector produced it, or kHullEdge.
struct LabeledPolygon {
  std::vector<Point> vertices;
  std::vector<std::size_t> edge_source;

  Polygon polygon() const { return Polygon{vertices}; }
};

namespace detail {

// Drops zero-length edges left behind by clipping through a vertex.
inline void drop_short_edges(LabeledPolygon& poly, double tol) {
  bool changed = true;
  while (changed && poly.vertices.size() >= 2) {
    changed = false;
    const std::size_t n = poly.vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      if (distance(poly.vertices[k], poly.vertices[(k + 1) % n]) <= tol) {
        poly.vertices.erase(poly.vertices.begin() + static_cast<std::ptrdiff_t>(k));
        poly.edge_source.erase(poly.edge_source.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
  if (poly.vertices.size() < 3) {
    poly.vertices.clear();
    poly.edge_source.clear();
  }
}

}  // namespace detail

/// Keeps the part of `poly` on the side of `site` of the perpendicular
/// bisector between `site` and `other`; the new edge is labeled `label`.
/// Vertices within `tol` of the bisector count as kept.
inline LabeledPolygon clip_to_bisector(const LabeledPolygon& poly, Point site, Point other, std::size_t label,
                                       double tol) {
  const Point normal = other - site;
  const double len = norm(normal);
  const Point mid = 0.5 * (site + other);
  // Signed distance past the bisector (positive = closer to `other`).
  auto excess = [&](Point p) { return dot(normal, p - mid) / len; };

  LabeledPolygon out;
  const std::size_t n = poly.vertices.size();
  if (n == 0) return out;
  out.vertices.reserve(n + 1);
  out.edge_source.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const Point a = poly.vertices[k];
    const Point b = poly.vertices[(k + 1) % n];
    const double fa = excess(a);
    const double fb = excess(b);
    const bool a_in = fa <= tol;
    const bool b_in = fb <= tol;
    if (a_in) {
      out.vertices.push_back(a);
      out.edge_source.push_back(poly.edge_source[k]);
      if (!b_in) {
        const double t = std::clamp(fa / (fa - fb), 0.0, 1.0);
        out.vertices.push_back(a + t * (b - a));
        out.edge_source.push_back(label);
      }
    } else if (b_in) {
      const double t = std::clamp(fa / (fa - fb), 0.0, 1.0);
      out.vertices.push_back(a + t * (b - a));
      out.edge_source.push_back(poly.edge_source[k]);
    }
  }
  detail::drop_short_edges(out, tol);
  return out;
}

struct Site {
  std::size_t ordinal = 0;
  std::int64_t person_id = 0;
  Point position;
  bool is_dummy = false;
};

/// Tolerances derived from the scene diameter so meter and pixel inputs
/// behave alike.
struct SceneTolerance {
  double diameter = 0.0;
  double coincident = 0.0;  // sites closer than this are the same point
  double clip = 0.0;        // half-plane membership slack
  double adjacency = 0.0;   // shortest shared edge that counts as adjacency

  static SceneTolerance of(std::span<const Point> pts) {
    SceneTolerance t;
    t.diameter = crowdpush::diameter(pts);
    t.coincident = 1e-12 * t.diameter;
    t.clip = 1e-12 * t.diameter;
    t.adjacency = 1e-9 * t.diameter;
    return t;
  }
};

inline std::string describe_site(const Site& s) {
  return s.is_dummy ? "dummy#" + std::to_string(s.ordinal) : "person " + std::to_string(s.person_id);
}

namespace detail {

inline void check_coincident(std::span<const Site> sites, double tol) {
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      if (distance(sites[i].position, sites[j].position) <= tol)
        throw CoincidentSiteError(describe_site(sites[i]), describe_site(sites[j]));
}

inline LabeledPolygon labeled_hull(const Polygon& hull) {
  LabeledPolygon cell;
  cell.vertices = hull.vertices;
  cell.edge_source.assign(hull.vertices.size(), kHullEdge);
  return cell;
}

inline LabeledPolygon build_cell(std::size_t index, std::span<const Site> sites, const Polygon& hull, double tol) {
  LabeledPolygon cell = labeled_hull(hull);
  const Point p = sites[index].position;
  for (std::size_t q = 0; q < sites.size() && !cell.vertices.empty(); ++q) {
    if (q == index) continue;
    cell = clip_to_bisector(cell, p, sites[q].position, q, tol);
  }
  return cell;
}

}  // namespace detail

/// Hull-bounded Voronoi cell of `site` among `all_sites`. Throws
/// CoincidentSiteError if `site` coincides with another site.
inline Polygon bounded_cell(const Site& site, std::span<const Site> all_sites, const Polygon& hull) {
  std::vector<Point> pts;
  pts.reserve(all_sites.size());
  for (const auto& s : all_sites) pts.push_back(s.position);
  const auto tol = SceneTolerance::of(pts);
  std::size_t index = all_sites.size();
  for (std::size_t i = 0; i < all_sites.size(); ++i) {
    if (all_sites[i].ordinal == site.ordinal) {
      index = i;
      continue;
    }
    if (distance(all_sites[i].position, site.position) <= tol.coincident)
      throw CoincidentSiteError(describe_site(site), describe_site(all_sites[i]));
  }
  if (index == all_sites.size()) throw ValidationError("site is not part of the site set");
  return detail::build_cell(index, all_sites, hull, tol.clip).polygon();
}

/// Bounded Voronoi diagram of one frame. `cells[k]` belongs to `sites[k]`,
/// and `sites[k].ordinal == k`.
struct BoundedCellSet {
  std::int64_t frame = 0;
  std::vector<Site> sites;
  std::vector<LabeledPolygon> cells;
  Polygon hull;
  SceneTolerance tolerance;
};

/// Builds every bounded cell of a frame. Site ordinals are reassigned to the
/// input order. Throws DegenerateGeometryError (collinear or too few sites)
/// or CoincidentSiteError.
inline BoundedCellSet bounded_cells(std::int64_t frame, std::vector<Site> sites) {
  BoundedCellSet set;
  set.frame = frame;
  for (std::size_t i = 0; i < sites.size(); ++i) sites[i].ordinal = i;
  std::vector<Point> pts;
  pts.reserve(sites.size());
  for (const auto& s : sites) pts.push_back(s.position);
  set.tolerance = SceneTolerance::of(pts);
  detail::check_coincident(sites, set.tolerance.coincident);
  set.hull = convex_hull(pts);
  set.cells.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i)
    set.cells.push_back(detail::build_cell(i, sites, set.hull, set.tolerance.clip));
  set.sites = std::move(sites);
  return set;
}

/// Symmetric, irreflexive adjacency; neighbor lists sorted by ordinal.
struct NeighborGraph {
  std::int64_t frame = 0;
  std::vector<std::vector<std::size_t>> adjacency;

  bool adjacent(std::size_t a, std::size_t b) const {
    const auto& n = adjacency.at(a);
    return std::binary_search(n.begin(), n.end(), b);
  }
};

/// Length of the boundary of `cell` that was produced by the bisector with
/// site `other`.
inline double shared_edge_length(const LabeledPolygon& cell, std::size_t other) {
  double total = 0.0;
  const std::size_t n = cell.vertices.size();
  for (std::size_t k = 0; k < n; ++k)
    if (cell.edge_source[k] == other) total += distance(cell.vertices[k], cell.vertices[(k + 1) % n]);
  return total;
}

/// Two sites are direct neighbors when their shared bisector contributes an
/// edge longer than the adjacency tolerance to both bounded cells. Cells
/// meeting at a single point are not neighbors.
inline NeighborGraph direct_neighbors(const BoundedCellSet& set) {
  NeighborGraph graph;
  graph.frame = set.frame;
  const std::size_t n = set.cells.size();
  graph.adjacency.assign(n, {});
  const double eps = set.tolerance.adjacency;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> candidates;
    for (std::size_t src : set.cells[i].edge_source)
      if (src != kHullEdge && src > i) candidates.push_back(src);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (std::size_t j : candidates) {
      if (shared_edge_length(set.cells[i], j) > eps && shared_edge_length(set.cells[j], i) > eps) {
        graph.adjacency[i].push_back(j);
        graph.adjacency[j].push_back(i);
      }
    }
  }
  for (auto& list : graph.adjacency) std::sort(list.begin(), list.end());
  return graph;
}

/// 3x3 projective map, row-major.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  bool invertible() const { return std::abs(determinant()) > 1e-12; }

  Point apply(Point p) const {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
  }

  Polygon apply(const Polygon& poly) const {
    Polygon out;
    out.vertices.reserve(poly.vertices.size());
    for (const auto& v : poly.vertices) out.vertices.push_back(apply(v));
    return out;
  }
};

}  // namespace crowdpush
