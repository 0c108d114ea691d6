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

#include "sslines/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sslines {
namespace {

constexpr double kMinSegmentLength = 1e-9;

// Half-open parameter range of t in [0, 1] for which lo <= s + t d < hi.
// Returns false when empty.
struct TRange {
  double lo = 0.0;
  double hi = 1.0;
  bool lo_open = false;
  bool hi_open = false;

  void raise_lo(double v, bool open) {
    if (v > lo || (v == lo && open)) {
      lo = v;
      lo_open = open;
    }
  }
  void lower_hi(double v, bool open) {
    if (v < hi || (v == hi && open)) {
      hi = v;
      hi_open = open;
    }
  }
  bool empty() const { return lo > hi || (lo == hi && (lo_open || hi_open)); }
};

bool constrain_half_open(TRange& r, double s, double d, double lo, double hi) {
  if (d == 0.0) return s >= lo && s < hi;
  if (d > 0.0) {
    r.raise_lo((lo - s) / d, false);
    r.lower_hi((hi - s) / d, true);
  } else {
    r.lower_hi((lo - s) / d, false);
    r.raise_lo((hi - s) / d, true);
  }
  return !r.empty();
}

bool segment_hits_half_open_box(const LineSegment& seg, double x0, double y0, double x1, double y1) {
  TRange r;
  const Point d = seg.end - seg.start;
  if (!constrain_half_open(r, seg.start.x, d.x, x0, x1)) return false;
  if (!constrain_half_open(r, seg.start.y, d.y, y0, y1)) return false;
  return !r.empty();
}

float sample_bilinear(const Image& img, int c, double x, double y) {
  // x, y in continuous coordinates; pixel centers sit at +0.5.
  const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(img.width() - 1));
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(img.height() - 1));
  const int ix = std::min(static_cast<int>(fx), img.width() - 1);
  const int iy = std::min(static_cast<int>(fy), img.height() - 1);
  const int ix1 = std::min(ix + 1, img.width() - 1);
  const int iy1 = std::min(iy + 1, img.height() - 1);
  const double ax = fx - ix;
  const double ay = fy - iy;
  const double top = img(c, iy, ix) * (1.0 - ax) + img(c, iy, ix1) * ax;
  const double bottom = img(c, iy1, ix) * (1.0 - ax) + img(c, iy1, ix1) * ax;
  return static_cast<float>(top * (1.0 - ay) + bottom * ay);
}

}  // namespace

TriPoint to_tripoint(const LineSegment& seg) {
  if (!seg.is_finite() || seg.length() <= kMinSegmentLength) {
    throw GeometryError("to_tripoint: degenerate segment");
  }
  const Point c = seg.midpoint();
  return {c, seg.start - c, seg.end - c};
}

LineSegment from_tripoint(const TriPoint& tp) {
  LineSegment seg{tp.center + tp.disp_start, tp.center + tp.disp_end, std::nullopt};
  if (!seg.is_finite() || seg.length() <= kMinSegmentLength) {
    throw GeometryError("from_tripoint: zero-length result");
  }
  return seg;
}

SolChain sol_split(const LineSegment& seg, double sol_length, double overlap_ratio) {
  if (!(sol_length > 0.0)) throw ConfigError("sol_split: sol_length must be positive");
  if (!(overlap_ratio >= 0.0 && overlap_ratio <= 0.9)) {
    throw ConfigError("sol_split: overlap_ratio must lie in [0, 0.9], got " + std::to_string(overlap_ratio));
  }
  SolChain chain;
  chain.parent = seg;
  const double length = seg.length();
  if (!seg.is_finite() || length <= kMinSegmentLength) throw GeometryError("sol_split: degenerate segment");

  if (length <= sol_length) {
    chain.intervals.emplace_back(0.0, 1.0);
  } else {
    const double stride = sol_length * (1.0 - overlap_ratio);
    const auto count = static_cast<int>(std::ceil((length - sol_length) / stride - 1e-12)) + 1;
    const double last_start = (length - sol_length) / length;
    for (int i = 0; i < count; ++i) {
      const double t0 = std::min(i * stride / length, last_start);
      const double t1 = (i + 1 == count) ? 1.0 : t0 + sol_length / length;
      chain.intervals.emplace_back(t0, t1);
    }
  }
  for (auto [t0, t1] : chain.intervals) {
    chain.segments.push_back(to_tripoint({seg.point_at(t0), seg.point_at(t1), std::nullopt}));
  }
  return chain;
}

double point_segment_distance(Point p, const LineSegment& seg) {
  const Point d = seg.end - seg.start;
  const double len2 = d.x * d.x + d.y * d.y;
  if (len2 == 0.0) return distance(p, seg.start);
  const double t = std::clamp(((p.x - seg.start.x) * d.x + (p.y - seg.start.y) * d.y) / len2, 0.0, 1.0);
  return distance(p, seg.point_at(t));
}

std::optional<LineSegment> clip_to_rect(const LineSegment& seg, double x0, double y0, double x1, double y1) {
  const Point d = seg.end - seg.start;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {seg.start.x - x0, x1 - seg.start.x, seg.start.y - y0, y1 - seg.start.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return std::nullopt;
  }
  LineSegment out{t0 == 0.0 ? seg.start : seg.point_at(t0), t1 == 1.0 ? seg.end : seg.point_at(t1), seg.score};
  return out;
}

GeomTransform GeomTransform::hflip(int width, int height) {
  return {TransformKind::kHFlip, 0, {}, width, height, width, height};
}

GeomTransform GeomTransform::vflip(int width, int height) {
  return {TransformKind::kVFlip, 0, {}, width, height, width, height};
}

GeomTransform GeomTransform::rot90(int k, int width, int height) {
  k = ((k % 4) + 4) % 4;
  const bool swap = (k % 2) == 1;
  return {TransformKind::kRot90, k, {}, width, height, swap ? height : width, swap ? width : height};
}

GeomTransform GeomTransform::crop_resize(CropWindow window, int width, int height, int out_width, int out_height) {
  if (!(window.x0 >= 0.0 && window.y0 >= 0.0 && window.x1 <= width && window.y1 <= height &&
        window.x1 > window.x0 && window.y1 > window.y0)) {
    throw GeometryError("crop window outside source image");
  }
  if (out_width <= 0 || out_height <= 0) throw GeometryError("crop_resize: empty output size");
  return {TransformKind::kCropResize, 0, window, width, height, out_width, out_height};
}

Point GeomTransform::map(Point p) const {
  const double w = src_width;
  const double h = src_height;
  switch (kind) {
    case TransformKind::kHFlip:
      return {w - p.x, p.y};
    case TransformKind::kVFlip:
      return {p.x, h - p.y};
    case TransformKind::kRot90:
      switch (rotations) {
        case 0:
          return p;
        case 1:
          return {h - p.y, p.x};
        case 2:
          return {w - p.x, h - p.y};
        default:
          return {p.y, w - p.x};
      }
    case TransformKind::kCropResize:
      return {(p.x - window.x0) * dst_width / (window.x1 - window.x0),
              (p.y - window.y0) * dst_height / (window.y1 - window.y0)};
  }
  return p;
}

Point GeomTransform::unmap(Point p) const {
  const double w = src_width;
  const double h = src_height;
  switch (kind) {
    case TransformKind::kHFlip:
      return {w - p.x, p.y};
    case TransformKind::kVFlip:
      return {p.x, h - p.y};
    case TransformKind::kRot90:
      switch (rotations) {
        case 0:
          return p;
        case 1:
          return {p.y, h - p.x};
        case 2:
          return {w - p.x, h - p.y};
        default:
          return {w - p.y, p.x};
      }
    case TransformKind::kCropResize:
      return {window.x0 + p.x * (window.x1 - window.x0) / dst_width,
              window.y0 + p.y * (window.y1 - window.y0) / dst_height};
  }
  return p;
}

Point map_point(std::span<const GeomTransform> chain, Point p) {
  for (const auto& t : chain) p = t.map(p);
  return p;
}

Point unmap_point(std::span<const GeomTransform> chain, Point p) {
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) p = it->unmap(p);
  return p;
}

Image transform_image(const GeomTransform& t, const Image& image) {
  if (image.width() != t.src_width || image.height() != t.src_height) {
    throw ShapeError("transform_image: image size does not match transform source size");
  }
  const int channels = image.channels();
  Image out(channels, t.dst_height, t.dst_width);
  const int w = image.width();
  const int h = image.height();
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < t.dst_height; ++y) {
      for (int x = 0; x < t.dst_width; ++x) {
        float v = 0.0f;
        switch (t.kind) {
          case TransformKind::kHFlip:
            v = image(c, y, w - 1 - x);
            break;
          case TransformKind::kVFlip:
            v = image(c, h - 1 - y, x);
            break;
          case TransformKind::kRot90:
            switch (t.rotations) {
              case 0:
                v = image(c, y, x);
                break;
              case 1:
                v = image(c, h - 1 - x, y);
                break;
              case 2:
                v = image(c, h - 1 - y, w - 1 - x);
                break;
              default:
                v = image(c, x, w - 1 - y);
                break;
            }
            break;
          case TransformKind::kCropResize: {
            const Point src = t.unmap({x + 0.5, y + 0.5});
            v = sample_bilinear(image, c, src.x, src.y);
            break;
          }
        }
        out(c, y, x) = v;
      }
    }
  }
  return out;
}

std::vector<LineSegment> transform_lines(const GeomTransform& t, std::span<const LineSegment> lines,
                                         double min_length) {
  std::vector<LineSegment> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    LineSegment src = line;
    if (t.kind == TransformKind::kCropResize) {
      auto clipped = clip_to_rect(line, t.window.x0, t.window.y0, t.window.x1, t.window.y1);
      if (!clipped) continue;
      src = *clipped;
    }
    LineSegment mapped{t.map(src.start), t.map(src.end), src.score};
    if (t.kind == TransformKind::kCropResize && mapped.length() < min_length) continue;
    out.push_back(mapped);
  }
  return out;
}

TransformedSample apply_transform(const GeomTransform& t, const Image& image, std::span<const LineSegment> lines,
                                  double min_length) {
  return {transform_image(t, image), transform_lines(t, lines, min_length)};
}

Grid<std::uint8_t> rasterize(std::span<const LineSegment> lines, int height, int width, double thickness) {
  if (height < 8 || width < 8) throw GeometryError("rasterize: map must be at least 8x8");
  Grid<std::uint8_t> out(height, width, 0);
  const double half = thickness * 0.5;
  for (const auto& seg : lines) {
    const double min_x = std::min(seg.start.x, seg.end.x);
    const double max_x = std::max(seg.start.x, seg.end.x);
    const double min_y = std::min(seg.start.y, seg.end.y);
    const double max_y = std::max(seg.start.y, seg.end.y);
    const int i0 = std::max(0, static_cast<int>(std::floor(min_x - half - 0.5)));
    const int i1 = std::min(width - 1, static_cast<int>(std::ceil(max_x + half)));
    const int j0 = std::max(0, static_cast<int>(std::floor(min_y - half - 0.5)));
    const int j1 = std::min(height - 1, static_cast<int>(std::ceil(max_y + half)));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        if (out(j, i)) continue;
        const double cx = i + 0.5;
        const double cy = j + 0.5;
        if (segment_hits_half_open_box(seg, cx - half, cy - half, cx + half, cy + half)) out(j, i) = 1;
      }
    }
  }
  return out;
}

}  // namespace sslines
