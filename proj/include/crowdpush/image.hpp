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

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crowdpush/error.hpp"
#include "crowdpush/geometry.hpp"

namespace crowdpush {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit interleaved RGB image. Pixel (x, y) is centered at integer
/// coordinates (x, y); y grows downward.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = fill[0];
      data[i + 1] = fill[1];
      data[i + 2] = fill[2];
    }
  }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  std::uint8_t* at(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  Rgb pixel(int x, int y) const {
    const auto* p = at(x, y);
    return {p[0], p[1], p[2]};
  }

  void set(int x, int y, Rgb c) {
    auto* p = at(x, y);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

inline Image read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const Image& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.data.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

/// Bilinear resize with half-pixel-centre sampling and edge clamping. A
/// same-size resize is the identity.
inline Image resize_bilinear(const Image& src, int width, int height) {
  if (src.width < 1 || src.height < 1) throw ValidationError("cannot resize an empty image");
  Image out(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      auto* o = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = src.at(x0, y0)[c] * (1.0 - wx) + src.at(x1, y0)[c] * wx;
        const double bottom = src.at(x0, y1)[c] * (1.0 - wx) + src.at(x1, y1)[c] * wx;
        const double v = top * (1.0 - wy) + bottom * wy;
        o[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

/// Integer pixel box, inclusive on both ends.
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool empty() const { return x1 < x0 || y1 < y0; }
};

/// Bounding box of a polygon clamped to the image; empty when the polygon
/// misses the frame.
inline PixelBox clamped_bounds(std::span<const Point> poly, int width, int height) {
  double minx = poly[0].x, maxx = poly[0].x, miny = poly[0].y, maxy = poly[0].y;
  for (const auto& p : poly) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  PixelBox box;
  if (maxx < 0.0 || maxy < 0.0 || minx > width - 1 || miny > height - 1) return box;
  box.x0 = std::max(0, static_cast<int>(std::floor(minx)));
  box.y0 = std::max(0, static_cast<int>(std::floor(miny)));
  box.x1 = std::min(width - 1, static_cast<int>(std::ceil(maxx)));
  box.y1 = std::min(height - 1, static_cast<int>(std::ceil(maxy)));
  return box;
}

/// Cuts `box` out of `frame`; when `mask` is set, pixels whose centre lies
/// outside the polygon become black.
inline Image cut_polygon(const Image& frame, std::span<const Point> poly, const PixelBox& box, bool mask) {
  Image out(box.width(), box.height());
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      const bool keep =
          !mask || locate(poly, Point{static_cast<double>(x), static_cast<double>(y)}, 1e-9) != Containment::outside;
      if (keep) std::memcpy(out.at(x - box.x0, y - box.y0), frame.at(x, y), 3);
    }
  }
  return out;
}

}  // namespace crowdpush
