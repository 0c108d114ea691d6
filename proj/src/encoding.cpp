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

#include "sslines/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

namespace sslines {
namespace {

constexpr double kBoundsSlack = 1e-9;

int cell_index(double v, int extent) { return std::clamp(static_cast<int>(std::floor(v)), 0, extent - 1); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Assigns tri-points to cells. The cell holding a segment's midpoint is its
// center cell (the longer segment wins a shared cell). Cells within
// `radius` of a center cell that are not center cells themselves also
// regress the segment nearest to them, with displacements taken from their
// own anchor, so a peak that lands one cell off still decodes sensibly.
void encode_block(GroundTruthMaps& gt, Grid<std::uint8_t>& mask, const TpBlock& block,
                  std::span<const LineSegment> segments, int radius) {
  auto& maps = gt.maps;
  const int h = maps.height();
  const int w = maps.width();
  const double diag = std::hypot(static_cast<double>(w), static_cast<double>(h));
  std::vector<LineSegment> segs;
  for (const auto& seg : segments) segs.push_back(canonical_orientation(seg));

  Grid<int> owner(h, w, -1);
  Grid<std::uint8_t> is_center(h, w, 0);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Point c = segs[i].midpoint();
    const int px = cell_index(c.x, w);
    const int py = cell_index(c.y, h);
    if (is_center(py, px) && segs[owner(py, px)].length() >= segs[i].length()) continue;
    is_center(py, px) = 1;
    owner(py, px) = static_cast<int>(i);
  }
  Grid<double> claim(h, w, INFINITY);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Point c = segs[i].midpoint();
    const int px = cell_index(c.x, w);
    const int py = cell_index(c.y, h);
    for (int y = std::max(0, py - radius); y <= std::min(h - 1, py + radius); ++y) {
      for (int x = std::max(0, px - radius); x <= std::min(w - 1, px + radius); ++x) {
        if (is_center(y, x)) continue;
        const double d = distance({x + 0.5, y + 0.5}, c);
        const int cur = owner(y, x);
        if (d < claim(y, x) || (d == claim(y, x) && cur >= 0 && segs[i].length() > segs[cur].length())) {
          claim(y, x) = d;
          owner(y, x) = static_cast<int>(i);
        }
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (owner(y, x) < 0) continue;
      const LineSegment& s = segs[owner(y, x)];
      const Point anchor{static_cast<double>(x), static_cast<double>(y)};
      const Point ds = s.start - anchor;
      const Point de = s.end - anchor;
      mask(y, x) = 1;
      maps(block.center, y, x) = is_center(y, x) ? 1.0 : 0.0;
      maps(block.disp + 0, y, x) = ds.x;
      maps(block.disp + 1, y, x) = ds.y;
      maps(block.disp + 2, y, x) = de.x;
      maps(block.disp + 3, y, x) = de.y;
      maps(block.length, y, x) = s.length() / diag;
      maps(block.degree, y, x) = normalized_degree(s);
    }
  }
}

}  // namespace

double normalized_degree(const LineSegment& seg) {
  double a = std::atan2(seg.end.y - seg.start.y, seg.end.x - seg.start.x);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  return a / std::numbers::pi;
}

LineSegment canonical_orientation(const LineSegment& seg) {
  const Point d = seg.end - seg.start;
  if (d.y > 0.0 || (d.y == 0.0 && d.x > 0.0)) return seg;
  return seg.reversed();
}

GroundTruthMaps encode_ground_truth(std::span<const LineSegment> lines, int height, int width,
                                   const SolParams& sol, int regression_radius) {
  if (regression_radius < 0) throw ConfigError("encode_ground_truth: regression_radius must be non-negative");
  GroundTruthMaps gt{Tensor3<double>(ChannelLayout::kNumChannels, height, width, 0.0),
                     Grid<std::uint8_t>(height, width, 0), Grid<std::uint8_t>(height, width, 0)};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const bool inside = l.is_finite() && std::min({l.start.x, l.end.x, l.start.y, l.end.y}) >= -kBoundsSlack &&
                        std::max(l.start.x, l.end.x) <= width + kBoundsSlack &&
                        std::max(l.start.y, l.end.y) <= height + kBoundsSlack;
    if (!inside) {
      std::ostringstream msg;
      msg << "encode_ground_truth: line " << i << " (" << l.start.x << "," << l.start.y << ")-(" << l.end.x << ","
          << l.end.y << ") lies outside the " << width << "x" << height << " map";
      throw GeometryError(msg.str());
    }
    if (l.length() <= 1e-9) throw GeometryError("encode_ground_truth: line " + std::to_string(i) + " is degenerate");
  }
  if (lines.empty()) return gt;

  std::vector<LineSegment> pieces;
  for (const auto& l : lines) {
    const auto chain = sol_split(canonical_orientation(l), sol.sol_length, sol.overlap_ratio);
    for (const auto& tp : chain.segments) pieces.push_back(from_tripoint(tp));
  }
  encode_block(gt, gt.regression_mask, kTpBlock, lines, regression_radius);
  encode_block(gt, gt.sol_regression_mask, kSolBlock, pieces, regression_radius);

  const auto line_map = rasterize(lines, height, width, 1.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) gt.maps(ChannelLayout::kSegLine, y, x) = line_map(y, x);
  }
  for (const auto& l : lines) {
    for (Point p : {l.start, l.end}) {
      gt.maps(ChannelLayout::kSegJunction, cell_index(p.y, height), cell_index(p.x, width)) = 1.0;
    }
  }
  return gt;
}

FeatureMaps ideal_feature_maps(const GroundTruthMaps& gt, double saturation) {
  FeatureMaps out = gt.maps;
  for (int c = 0; c < out.channels(); ++c) {
    if (!ChannelLayout::is_classification(c)) continue;
    for (auto& v : out.plane(c)) v = v >= 0.5 ? saturation : -saturation;
  }
  return out;
}

std::vector<DecodedLine> decode_peaks(const FeatureMaps& maps, const DecodeParams& params, const TpBlock& block) {
  const int h = maps.height();
  const int w = maps.width();
  const double logit_threshold =
      params.score_threshold <= 0.0 ? -INFINITY
                                    : (params.score_threshold >= 1.0 ? INFINITY
                                                                     : std::log(params.score_threshold /
                                                                                (1.0 - params.score_threshold)));
  std::vector<DecodedLine> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = maps(block.center, y, x);
      if (!(v >= logit_threshold)) continue;
      const double score = sigmoid(v);
      if (score < params.score_threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || x + dx < 0 || x + dx >= w || y + dy < 0 || y + dy >= h) continue;
          if (maps(block.center, y + dy, x + dx) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      const Point anchor{static_cast<double>(x), static_cast<double>(y)};
      LineSegment seg{anchor + Point{maps(block.disp, y, x), maps(block.disp + 1, y, x)},
                      anchor + Point{maps(block.disp + 2, y, x), maps(block.disp + 3, y, x)}, score};
      if (!seg.is_finite() || seg.length() < params.min_length) continue;
      out.push_back({seg, x, y});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DecodedLine& a, const DecodedLine& b) { return *a.line.score > *b.line.score; });
  if (params.topk >= 0 && out.size() > static_cast<std::size_t>(params.topk)) out.resize(params.topk);
  return out;
}

std::vector<LineSegment> decode_lines(const FeatureMaps& maps, const DecodeParams& params) {
  if (maps.channels() < ChannelLayout::kInferenceChannels) {
    throw ShapeError("decode_lines: expected at least 5 channels, got " + maps.shape_string());
  }
  std::vector<LineSegment> lines;
  for (auto& d : decode_peaks(maps, params, kTpBlock)) lines.push_back(d.line);
  return lines;
}

double structural_distance(const LineSegment& a, const LineSegment& b) {
  const double direct = distance(a.start, b.start) + distance(a.end, b.end);
  const double swapped = distance(a.start, b.end) + distance(a.end, b.start);
  return std::min(direct, swapped);
}

std::vector<MatchedPair> match_lines(std::span<const LineSegment> pred, std::span<const LineSegment> gt,
                                     double max_dist) {
  std::vector<MatchedPair> candidates;
  for (int i = 0; i < static_cast<int>(pred.size()); ++i) {
    for (int j = 0; j < static_cast<int>(gt.size()); ++j) {
      const double direct = distance(pred[i].start, gt[j].start) + distance(pred[i].end, gt[j].end);
      const double swapped = distance(pred[i].start, gt[j].end) + distance(pred[i].end, gt[j].start);
      const double d = std::min(direct, swapped);
      if (d <= max_dist) candidates.push_back({i, j, d, swapped < direct});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
    return std::tie(a.distance, a.pred, a.gt) < std::tie(b.distance, b.pred, b.gt);
  });
  std::vector<char> pred_used(pred.size(), 0);
  std::vector<char> gt_used(gt.size(), 0);
  std::vector<MatchedPair> out;
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = 1;
    out.push_back(c);
  }
  return out;
}

}  // namespace sslines
