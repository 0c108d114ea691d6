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

#ifndef SSLINES_ENCODING_HPP_
#define SSLINES_ENCODING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sslines/geometry.hpp"
#include "sslines/tensor.hpp"

namespace sslines {

/**
 * Layout of the 16 prediction channels. The first five channels (center and
 * the four displacement maps) are all that inference needs.
 *
 *   0      tp center (logit)
 *   1..4   tp displacement dx_start, dy_start, dx_end, dy_end
 *   5      tp length (normalized by the map diagonal)
 *   6      tp degree (orientation in [0, pi) scaled to [0, 1])
 *   7..13  the same seven maps for segment-of-line pieces
 *   14     line pixel (logit)
 *   15     junction pixel (logit)
 */
struct ChannelLayout {
  static constexpr int kTpCenter = 0;
  static constexpr int kTpDisp = 1;
  static constexpr int kTpLength = 5;
  static constexpr int kTpDegree = 6;
  static constexpr int kSolCenter = 7;
  static constexpr int kSolDisp = 8;
  static constexpr int kSolLength = 12;
  static constexpr int kSolDegree = 13;
  static constexpr int kSegLine = 14;
  static constexpr int kSegJunction = 15;
  static constexpr int kNumChannels = 16;
  static constexpr int kInferenceChannels = 5;

  static constexpr bool is_classification(int c) {
    return c == kTpCenter || c == kSolCenter || c == kSegLine || c == kSegJunction;
  }
};

/// Channel indices of one tri-point block (TP or SoL).
struct TpBlock {
  int center;
  int disp;
  int length;
  int degree;
};

inline constexpr TpBlock kTpBlock{ChannelLayout::kTpCenter, ChannelLayout::kTpDisp, ChannelLayout::kTpLength,
                                  ChannelLayout::kTpDegree};
inline constexpr TpBlock kSolBlock{ChannelLayout::kSolCenter, ChannelLayout::kSolDisp, ChannelLayout::kSolLength,
                                   ChannelLayout::kSolDegree};

/// 16 x H' x W' network output; classification channels hold logits.
using FeatureMaps = Tensor3<double>;

struct GroundTruthMaps {
  Tensor3<double> maps;
  Grid<std::uint8_t> regression_mask;
  Grid<std::uint8_t> sol_regression_mask;
};

struct SolParams {
  double sol_length = 8.0;  // map pixels (32 px at input scale with the /4 output stride)
  double overlap_ratio = 0.5;
};

/// Orientation of a segment folded to [0, pi) and scaled to [0, 1).
double normalized_degree(const LineSegment& seg);

/// Reorder endpoints so that end - start points into the half plane
/// dy > 0 (or dy == 0, dx > 0). Used to make displacement targets unique.
LineSegment canonical_orientation(const LineSegment& seg);

/// Encode line labels (already in output-map coordinates) as training targets.
/// The center channel marks only each segment's midpoint cell; the regression
/// channels (and the regression masks) also cover non-center cells within
/// `regression_radius` of a center, each regressing its nearest segment.
GroundTruthMaps encode_ground_truth(std::span<const LineSegment> lines, int height, int width,
                                   const SolParams& sol = {}, int regression_radius = 0);

/// Saturated logits / exact regression values reproducing `gt` under decoding.
FeatureMaps ideal_feature_maps(const GroundTruthMaps& gt, double saturation = 20.0);

struct DecodeParams {
  double score_threshold = 0.05;
  int topk = 200;
  double min_length = 1.0;  // map pixels
};

struct DecodedLine {
  LineSegment line;
  int peak_x = 0;
  int peak_y = 0;
};

/// Lines at 3x3 local maxima of the center channel of `block`, best first.
/// Ties are kept in row-major scan order.
std::vector<DecodedLine> decode_peaks(const FeatureMaps& maps, const DecodeParams& params,
                                      const TpBlock& block = kTpBlock);

std::vector<LineSegment> decode_lines(const FeatureMaps& maps, const DecodeParams& params);

/// min over endpoint orderings of |l_s - m_s|_2 + |l_e - m_e|_2
double structural_distance(const LineSegment& a, const LineSegment& b);

struct MatchedPair {
  int pred = 0;
  int gt = 0;
  double distance = 0.0;
  bool swapped = false;  // pred.start pairs with gt.end
};

/// One-to-one greedy matching in increasing structural distance.
std::vector<MatchedPair> match_lines(std::span<const LineSegment> pred, std::span<const LineSegment> gt,
                                     double max_dist = 5.0);

}  // namespace sslines

#endif  // SSLINES_ENCODING_HPP_
