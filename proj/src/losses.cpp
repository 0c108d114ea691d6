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

#include "sslines/losses.hpp"

#include <algorithm>
#include <cmath>

namespace sslines {
namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
double sign(double v) { return (v > 0.0) - (v < 0.0); }

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": size mismatch " + std::to_string(a) + " vs " + std::to_string(b));
}

std::span<const std::uint8_t> mask_span(const Grid<std::uint8_t>& g) { return g.values(); }

}  // namespace

double wbce(std::span<const double> pred, std::span<const double> target, double positive_weight,
            std::span<double> grad) {
  require_same_size(pred.size(), target.size(), "wbce");
  if (!grad.empty()) require_same_size(pred.size(), grad.size(), "wbce grad");
  if (pred.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i];
    const double y = target[i];
    // -log(sigmoid(x)) = softplus(-x), -log(1 - sigmoid(x)) = softplus(x)
    sum += positive_weight * y * softplus(-x) + (1.0 - y) * softplus(x);
    if (!grad.empty()) {
      const double s = sigmoid(x);
      grad[i] += (positive_weight * y * (s - 1.0) + (1.0 - y) * s) * inv_n;
    }
  }
  return sum * inv_n;
}

double masked_l1(std::span<const double> pred, std::span<const double> target, std::span<const std::uint8_t> mask,
                 std::span<double> grad, double grad_scale) {
  require_same_size(pred.size(), target.size(), "masked_l1");
  require_same_size(pred.size(), mask.size(), "masked_l1 mask");
  std::size_t count = 0;
  for (auto m : mask) count += m ? 1 : 0;
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    const double d = pred[i] - target[i];
    sum += std::abs(d);
    if (!grad.empty()) grad[i] += grad_scale * sign(d) * inv;
  }
  return sum * inv;
}

double matching_loss(const FeatureMaps& pred, std::span<const LineSegment> gt_lines, const MatchParams& params,
                     const TpBlock& block, FeatureMaps* grad, double grad_scale) {
  if (gt_lines.empty()) return 0.0;
  const auto decoded = decode_peaks(pred, params.decode, block);
  if (decoded.empty()) return 0.0;
  std::vector<LineSegment> lines;
  lines.reserve(decoded.size());
  for (const auto& d : decoded) lines.push_back(d.line);
  const auto matches = match_lines(lines, gt_lines, params.max_dist);
  if (matches.empty()) return 0.0;

  const double inv = 1.0 / static_cast<double>(matches.size());
  const int h = pred.height();
  const int w = pred.width();
  double sum = 0.0;
  for (const auto& m : matches) {
    const auto& d = decoded[m.pred];
    const auto& g = gt_lines[m.gt];
    const Point gs = m.swapped ? g.end : g.start;
    const Point ge = m.swapped ? g.start : g.end;
    const double dsx = d.line.start.x - gs.x;
    const double dsy = d.line.start.y - gs.y;
    const double dex = d.line.end.x - ge.x;
    const double dey = d.line.end.y - ge.y;
    const Point mid = g.midpoint();
    const int cx = std::clamp(static_cast<int>(std::floor(mid.x)), 0, w - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(mid.y)), 0, h - 1);
    sum += std::abs(dsx) + std::abs(dsy) + std::abs(dex) + std::abs(dey);
    sum += std::abs(d.peak_x - cx) + std::abs(d.peak_y - cy);
    if (grad) {
      const double s = grad_scale * inv;
      (*grad)(block.disp + 0, d.peak_y, d.peak_x) += s * sign(dsx);
      (*grad)(block.disp + 1, d.peak_y, d.peak_x) += s * sign(dsy);
      (*grad)(block.disp + 2, d.peak_y, d.peak_x) += s * sign(dex);
      (*grad)(block.disp + 3, d.peak_y, d.peak_x) += s * sign(dey);
    }
  }
  return sum * inv;
}

LabeledLossResult labeled_loss(const FeatureMaps& pred, const GroundTruthMaps& gt,
                               std::span<const LineSegment> gt_lines, const LabeledLossConfig& cfg) {
  require_same_shape(pred, gt.maps, "labeled_loss");
  if (pred.channels() != ChannelLayout::kNumChannels) {
    throw ShapeError("labeled_loss: expected 16 channels, got " + pred.shape_string());
  }
  if (gt.regression_mask.height() != pred.height() || gt.regression_mask.width() != pred.width() ||
      gt.sol_regression_mask.height() != pred.height() || gt.sol_regression_mask.width() != pred.width()) {
    throw ShapeError("labeled_loss: regression mask shape mismatch");
  }
  LabeledLossResult r;
  r.grad = FeatureMaps(pred.channels(), pred.height(), pred.width(), 0.0);
  auto& b = r.breakdown;
  const auto& wt = cfg.weights;

  auto wbce_term = [&](int c, double pos_w, double weight) {
    std::vector<double> g(pred.plane_size(), 0.0);
    const double v = wbce(pred.plane(c), gt.maps.plane(c), pos_w, g);
    auto out = r.grad.plane(c);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += weight * g[i];
    return v;
  };
  auto l1_term = [&](int c, const Grid<std::uint8_t>& mask, double weight) {
    return masked_l1(pred.plane(c), gt.maps.plane(c), mask_span(mask), r.grad.plane(c), weight);
  };

  b.center = wbce_term(kTpBlock.center, cfg.center_positive_weight, wt.center);
  b.sol_center = wbce_term(kSolBlock.center, cfg.center_positive_weight, wt.sol_center);
  b.seg_line = wbce_term(ChannelLayout::kSegLine, cfg.line_positive_weight, wt.seg_line);
  b.seg_junction = wbce_term(ChannelLayout::kSegJunction, cfg.junction_positive_weight, wt.seg_junction);

  for (int k = 0; k < 4; ++k) {
    b.disp += l1_term(kTpBlock.disp + k, gt.regression_mask, wt.disp);
    b.sol_disp += l1_term(kSolBlock.disp + k, gt.sol_regression_mask, wt.sol_disp);
  }
  b.reg_length = l1_term(kTpBlock.length, gt.regression_mask, wt.reg_length) +
                 l1_term(kSolBlock.length, gt.sol_regression_mask, wt.reg_length);
  b.reg_degree = l1_term(kTpBlock.degree, gt.regression_mask, wt.reg_degree) +
                 l1_term(kSolBlock.degree, gt.sol_regression_mask, wt.reg_degree);

  b.match = matching_loss(pred, gt_lines, cfg.match, kTpBlock, &r.grad, wt.match);
  std::vector<LineSegment> sol_lines;
  for (const auto& l : gt_lines) {
    const auto chain = sol_split(canonical_orientation(l), cfg.sol.sol_length, cfg.sol.overlap_ratio);
    for (const auto& tp : chain.segments) sol_lines.push_back(from_tripoint(tp));
  }
  b.sol_match = matching_loss(pred, sol_lines, cfg.match, kSolBlock, &r.grad, wt.sol_match);

  b.total = wt.center * b.center + wt.disp * b.disp + wt.match * b.match + wt.sol_center * b.sol_center +
            wt.sol_disp * b.sol_disp + wt.sol_match * b.sol_match + wt.seg_line * b.seg_line +
            wt.seg_junction * b.seg_junction + wt.reg_length * b.reg_length + wt.reg_degree * b.reg_degree;
  return r;
}

ConsistencyLossResult consistency_loss(const FeatureMaps& weak_in, const FeatureMaps& strong1,
                                       const FeatureMaps* strong2, double tau, const WeakMix* mix) {
  require_same_shape(weak_in, strong1, "consistency_loss");
  if (strong2) require_same_shape(weak_in, *strong2, "consistency_loss");
  if (weak_in.channels() != ChannelLayout::kNumChannels) {
    throw ShapeError("consistency_loss: expected 16 channels, got " + weak_in.shape_string());
  }
  FeatureMaps mixed;
  if (mix) {
    require_same_shape(weak_in, mix->partner_weak, "consistency_loss partner");
    mixed = mix_maps(weak_in, mix->partner_weak, mix->mask);
  }
  const FeatureMaps& weak = mix ? mixed : weak_in;

  ConsistencyLossResult r;
  r.grad_strong1 = FeatureMaps(strong1.channels(), strong1.height(), strong1.width(), 0.0);
  if (strong2) r.grad_strong2 = FeatureMaps(strong2->channels(), strong2->height(), strong2->width(), 0.0);

  const int h = weak.height();
  const int w = weak.width();
  const double inv_n = 1.0 / static_cast<double>(static_cast<std::size_t>(h) * w);
  std::size_t gated = 0;
  const FeatureMaps* views[2] = {&strong1, strong2};
  FeatureMaps* grads[2] = {&r.grad_strong1, strong2 ? &r.grad_strong2 : nullptr};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!(sigmoid(weak(ChannelLayout::kTpCenter, y, x)) >= tau)) continue;
      ++gated;
      for (int v = 0; v < 2; ++v) {
        if (!views[v]) continue;
        const FeatureMaps& s = *views[v];
        FeatureMaps& g = *grads[v];
        for (int c = 0; c < ChannelLayout::kNumChannels; ++c) {
          const double sv = s(c, y, x);
          const double wv = weak(c, y, x);
          if (ChannelLayout::is_classification(c)) {
            const double target = wv >= 0.0 ? 1.0 : 0.0;
            r.breakdown.classification += (softplus(sv) - target * sv) * inv_n;
            g(c, y, x) += (sigmoid(sv) - target) * inv_n;
          } else {
            const double d = sv - wv;
            r.breakdown.regression += std::abs(d) * inv_n;
            g(c, y, x) += sign(d) * inv_n;
          }
        }
      }
    }
  }
  r.breakdown.mask_fraction = static_cast<double>(gated) * inv_n;
  r.breakdown.total = r.breakdown.classification + r.breakdown.regression;
  return r;
}

}  // namespace sslines
