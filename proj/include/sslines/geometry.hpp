/**
 * Copyright 2026 The sslines Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SSLINES_GEOMETRY_HPP_
#define SSLINES_GEOMETRY_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sslines/tensor.hpp"

namespace sslines {

/**
 * Coordinate convention used throughout the library: continuous (x, y) with
 * the origin at the top-left corner of the top-left pixel, x to the right and
 * y downwards. Pixel (col i, row j) covers [i, i+1) x [j, j+1).
 */
struct Point {
  double x = 0.0;
  double y = 0.0;

  Point operator+(Point o) const { return {x + o.x, y + o.y}; }
  Point operator-(Point o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point&) const = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct LineSegment {
  Point start;
  Point end;
  std::optional<double> score;

  double length() const { return distance(start, end); }
  Point midpoint() const { return {(start.x + end.x) * 0.5, (start.y + end.y) * 0.5}; }
  Point point_at(double t) const { return start + (end - start) * t; }
  LineSegment reversed() const { return {end, start, score}; }
  bool is_finite() const {
    return std::isfinite(start.x) && std::isfinite(start.y) && std::isfinite(end.x) && std::isfinite(end.y);
  }
};

/// Center point plus displacement vectors to the two endpoints.
struct TriPoint {
  Point center;
  Point disp_start;
  Point disp_end;
};

/// A parent segment split into overlapping collinear pieces, each encoded as
/// a TriPoint. `intervals[i]` is the parameter range of piece i on the parent.
struct SolChain {
  LineSegment parent;
  std::vector<TriPoint> segments;
  std::vector<std::pair<double, double>> intervals;
};

TriPoint to_tripoint(const LineSegment& seg);
LineSegment from_tripoint(const TriPoint& tp);

/// Split into pieces of `sol_length` with fractional overlap `overlap_ratio`.
/// Segments not longer than `sol_length` yield a single piece equal to the parent.
SolChain sol_split(const LineSegment& seg, double sol_length, double overlap_ratio);

/// Euclidean distance from p to the closed segment.
double point_segment_distance(Point p, const LineSegment& seg);

/// Liang-Barsky clip against the closed rectangle [x0, x1] x [y0, y1].
std::optional<LineSegment> clip_to_rect(const LineSegment& seg, double x0, double y0, double x1, double y1);

enum class TransformKind : std::uint8_t { kHFlip, kVFlip, kRot90, kCropResize };

struct CropWindow {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// A geometric image transform with exact label mapping.
struct GeomTransform {
  TransformKind kind = TransformKind::kHFlip;
  int rotations = 0;  // quarter turns clockwise (on screen), kRot90 only
  CropWindow window;  // kCropResize only, in source pixels
  int src_width = 0;
  int src_height = 0;
  int dst_width = 0;
  int dst_height = 0;

  static GeomTransform hflip(int width, int height);
  static GeomTransform vflip(int width, int height);
  static GeomTransform rot90(int k, int width, int height);
  static GeomTransform crop_resize(CropWindow window, int width, int height, int out_width, int out_height);

  Point map(Point p) const;
  Point unmap(Point p) const;
};

using Image = Tensor3<float>;

struct TransformedSample {
  Image image;
  std::vector<LineSegment> lines;
};

/// Map a point through a sequence of transforms applied in order.
Point map_point(std::span<const GeomTransform> chain, Point p);
Point unmap_point(std::span<const GeomTransform> chain, Point p);

/// Transform the image and its lines. Lines are clipped to crop windows;
/// remnants shorter than `min_length` target pixels are dropped.
TransformedSample apply_transform(const GeomTransform& t, const Image& image, std::span<const LineSegment> lines,
                                  double min_length = 2.0);

Image transform_image(const GeomTransform& t, const Image& image);
std::vector<LineSegment> transform_lines(const GeomTransform& t, std::span<const LineSegment> lines,
                                         double min_length = 2.0);

/**
 * Binary rasterization: pixel (i, j) is set when the segment passes within
 * Chebyshev distance thickness/2 of the pixel center, using the half-open
 * square [i + 1/2 - t/2, i + 1/2 + t/2) (same in y). With thickness 1 this is
 * exactly the set of pixels the segment passes through.
 */
Grid<std::uint8_t> rasterize(std::span<const LineSegment> lines, int height, int width, double thickness = 1.0);

}  // namespace sslines

#endif  // SSLINES_GEOMETRY_HPP_
