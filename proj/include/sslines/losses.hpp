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

#ifndef SSLINES_LOSSES_HPP_
#define SSLINES_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sslines/augment.hpp"
#include "sslines/encoding.hpp"

namespace sslines {

/**
 * Weighted binary cross-entropy on logits, averaged over pixels:
 *   -mean[ w * y * log(sigmoid(x)) + (1 - y) * log(1 - sigmoid(x)) ]
 * If `grad` is non-empty, d(loss)/d(pred) is accumulated into it.
 */
double wbce(std::span<const double> pred, std::span<const double> target, double positive_weight,
            std::span<double> grad = {});

/// Mean absolute error over mask-positive pixels, 0 for an empty mask.
double masked_l1(std::span<const double> pred, std::span<const double> target, std::span<const std::uint8_t> mask,
                 std::span<double> grad = {}, double grad_scale = 1.0);

struct MatchParams {
  DecodeParams decode{0.1, 256, 1.0};
  double max_dist = 5.0;  // map pixels
};

/**
 * Decodes lines from `block`, matches them to `gt_lines` and returns the mean
 * over matches of the L1 endpoint errors plus the L1 distance between the
 * decoded peak cell and the cell holding the ground-truth midpoint. Peak
 * locations are constants, so gradients reach only the displacement channels
 * at the selected peaks.
 */
double matching_loss(const FeatureMaps& pred, std::span<const LineSegment> gt_lines, const MatchParams& params,
                     const TpBlock& block = kTpBlock, FeatureMaps* grad = nullptr, double grad_scale = 1.0);

struct LossWeights {
  double center = 1.0;
  double disp = 1.0;
  double match = 1.0;
  double sol_center = 1.0;
  double sol_disp = 1.0;
  double sol_match = 1.0;
  double seg_line = 1.0;
  double seg_junction = 1.0;
  double reg_length = 1.0;
  double reg_degree = 1.0;
};

struct LabeledLossConfig {
  LossWeights weights;
  double center_positive_weight = 30.0;
  double junction_positive_weight = 30.0;
  double line_positive_weight = 1.0;
  SolParams sol;
  int regression_radius = 0;  // used when encoding targets for this loss
  MatchParams match;
};

struct LabeledLossBreakdown {
  double center = 0, disp = 0, match = 0;
  double sol_center = 0, sol_disp = 0, sol_match = 0;
  double seg_line = 0, seg_junction = 0;
  double reg_length = 0, reg_degree = 0;
  double total = 0;
};

struct LabeledLossResult {
  LabeledLossBreakdown breakdown;
  FeatureMaps grad;  // d(total)/d(pred)
};

LabeledLossResult labeled_loss(const FeatureMaps& pred, const GroundTruthMaps& gt,
                               std::span<const LineSegment> gt_lines, const LabeledLossConfig& config = {});

struct ConsistencyLossBreakdown {
  double classification = 0;  // BCE on center / line / junction channels, both views
  double regression = 0;      // L1 on displacement / length / degree channels, both views
  double mask_fraction = 0;
  double total = 0;
};

struct ConsistencyLossResult {
  ConsistencyLossBreakdown breakdown;
  FeatureMaps grad_strong1;
  FeatureMaps grad_strong2;  // empty when no second view was given
};

/// The weak prediction of the partner sample and the mask used to mix it.
struct WeakMix {
  const FeatureMaps& partner_weak;
  const MixMask& mask;
};

/**
 * Weak-to-strong consistency. The weak maps are a fixed target: the gate is
 * sigmoid(weak center) >= tau, classification channels use hard pseudo-labels
 * (weak logit >= 0) under BCE and regression channels use L1 against the weak
 * values. Per-pixel terms are summed over gated pixels and divided by the
 * number of map positions, then summed over the strong views.
 */
ConsistencyLossResult consistency_loss(const FeatureMaps& weak, const FeatureMaps& strong1, const FeatureMaps* strong2,
                                       double tau, const WeakMix* mix = nullptr);

}  // namespace sslines

#endif  // SSLINES_LOSSES_HPP_
