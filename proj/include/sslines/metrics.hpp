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

#ifndef SSLINES_METRICS_HPP_
#define SSLINES_METRICS_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sslines/geometry.hpp"

namespace sslines {

class MetricError : public Error {
 public:
  using Error::Error;
};

using LineSet = std::vector<LineSegment>;

/// Lines scaled from a width x height image to an eval_size square.
LineSet rescale_lines(std::span<const LineSegment> lines, double width, double height, int eval_size);

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
  double score = 0.0;
  long long tp = 0;    // true positives in the prefix
  long long n_gt = 0;  // 0 when unknown, e.g. for curves read back from JSON
};

/// Squared endpoint distance sum, minimized over the two endpoint orderings.
double squared_structural_distance(const LineSegment& a, const LineSegment& b);

/**
 * Precision/recall after each distinct score level, scores descending.
 *
 * Predictions are consumed in descending score order. The true-positive count
 * after a prefix is the size of a maximum one-to-one matching between the
 * prefix and the ground truth of each image, where a pair is admissible when
 * its squared structural distance is at most k. The count is maintained
 * incrementally with augmenting paths, so predictions already matched stay
 * matched and equal-score predictions are order independent.
 *
 * Inputs must already be at evaluation scale. Every prediction needs a score.
 */
std::vector<PrPoint> pr_curve(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth, double k);

/// All-points interpolated area: sum of recall steps times the precision envelope.
double average_precision(std::span<const PrPoint> curve);

double structural_ap(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth, double k);

struct HeatmapFParams {
  int eval_size = 128;
  double tolerance_px = 1.5;
  int n_thresholds = 33;
};

struct PixelCounts {
  long long matched = 0;
  long long pred_pixels = 0;
  long long gt_pixels = 0;
};

/// Greedy one-to-one matching of set pixels within the tolerance. Each
/// predicted pixel, in row-major order, takes the nearest free gt pixel
/// (ties broken row-major).
PixelCounts match_pixels(const Grid<std::uint8_t>& pred, const Grid<std::uint8_t>& gt, double tolerance_px);

double heatmap_f(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth,
                 const HeatmapFParams& params = {});

struct EvalReport {
  std::map<int, double> sap;  // k -> AP
  double f_h = 0.0;
  std::vector<PrPoint> pr_points;  // for the primary k
  int primary_k = 10;
  long long n_pred = 0;
  long long n_gt = 0;
  int n_images = 0;

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
};

struct MetricConfig {
  std::vector<int> sap_thresholds{5, 10, 15};
  int primary_k = 10;
  HeatmapFParams heatmap;
};

/// Full report from per-image predictions and ground truth in image coordinates.
EvalReport evaluate_lines(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth,
                          std::span<const std::pair<int, int>> image_sizes, const MetricConfig& cfg = {});

}  // namespace sslines

#endif  // SSLINES_METRICS_HPP_
