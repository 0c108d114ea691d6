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

#include "sslines/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "json.hpp"

namespace sslines {

LineSet rescale_lines(std::span<const LineSegment> lines, double width, double height, int eval_size) {
  const double sx = eval_size / width;
  const double sy = eval_size / height;
  LineSet out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    out.push_back({{l.start.x * sx, l.start.y * sy}, {l.end.x * sx, l.end.y * sy}, l.score});
  }
  return out;
}

double squared_structural_distance(const LineSegment& a, const LineSegment& b) {
  auto sq = [](Point p, Point q) { return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y); };
  const double direct = sq(a.start, b.start) + sq(a.end, b.end);
  const double swapped = sq(a.start, b.end) + sq(a.end, b.start);
  return std::min(direct, swapped);
}

namespace {

void check_lengths(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw MetricError("prediction and ground-truth image counts differ (" + std::to_string(predictions.size()) +
                      " vs " + std::to_string(ground_truth.size()) + ")");
  }
}

/// Bipartite graph of one image with an incremental maximum matching.
class ImageMatcher {
 public:
  ImageMatcher(const LineSet& preds, const LineSet& gts, double k)
      : adj_(preds.size()), gt_owner_(gts.size(), -1) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      for (std::size_t j = 0; j < gts.size(); ++j) {
        if (squared_structural_distance(preds[i], gts[j]) <= k) adj_[i].push_back(static_cast<int>(j));
      }
    }
  }

  bool insert(int pred) {
    seen_.assign(gt_owner_.size(), 0);
    return augment(pred);
  }

 private:
  bool augment(int pred) {
    for (int g : adj_[pred]) {
      if (seen_[g]) continue;
      seen_[g] = 1;
      if (gt_owner_[g] < 0 || augment(gt_owner_[g])) {
        gt_owner_[g] = pred;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> gt_owner_;
  std::vector<char> seen_;
};

}  // namespace

std::vector<PrPoint> pr_curve(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth,
                              double k) {
  check_lengths(predictions, ground_truth);
  struct Item {
    double score;
    int image;
    int index;
  };
  std::vector<Item> items;
  long long n_gt = 0;
  std::vector<ImageMatcher> matchers;
  matchers.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    n_gt += static_cast<long long>(ground_truth[i].size());
    matchers.emplace_back(predictions[i], ground_truth[i], k);
    for (std::size_t j = 0; j < predictions[i].size(); ++j) {
      const auto& s = predictions[i][j].score;
      if (!s) throw MetricError("prediction " + std::to_string(j) + " of image " + std::to_string(i) + " has no score");
      items.push_back({*s, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score > b.score; });

  std::vector<PrPoint> curve;
  long long tp = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (matchers[items[i].image].insert(items[i].index)) ++tp;
    const bool level_end = i + 1 == items.size() || items[i + 1].score != items[i].score;
    if (!level_end) continue;
    const double n = static_cast<double>(i + 1);
    curve.push_back(
        {tp / n, n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0, items[i].score, tp, n_gt});
  }
  return curve;
}

double average_precision(std::span<const PrPoint> curve) {
  double ap = 0.0;
  double envelope = 0.0;
  if (!curve.empty() && curve.back().n_gt > 0) {
    // Recall steps are summed as integers over each run of equal envelope, so
    // equal curves give bit-equal results regardless of how the steps split.
    long double sum = 0.0L;
    long long run_tp = 0;
    for (std::size_t i = curve.size(); i-- > 0;) {
      const double next = std::max(envelope, curve[i].precision);
      if (next != envelope) {
        sum += static_cast<long double>(run_tp) * envelope;
        run_tp = 0;
        envelope = next;
      }
      run_tp += curve[i].tp - (i == 0 ? 0 : curve[i - 1].tp);
    }
    sum += static_cast<long double>(run_tp) * envelope;
    return static_cast<double>(sum / static_cast<long double>(curve.back().n_gt));
  }
  // Walk backwards so the running max is the precision envelope.
  for (std::size_t i = curve.size(); i-- > 0;) {
    envelope = std::max(envelope, curve[i].precision);
    const double prev_recall = i == 0 ? 0.0 : curve[i - 1].recall;
    ap += (curve[i].recall - prev_recall) * envelope;
  }
  return ap;
}

double structural_ap(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth, double k) {
  return average_precision(pr_curve(predictions, ground_truth, k));
}

PixelCounts match_pixels(const Grid<std::uint8_t>& pred, const Grid<std::uint8_t>& gt, double tolerance_px) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw ShapeError("match_pixels: raster sizes differ");
  }
  struct Offset {
    double d;
    int dy;
    int dx;
  };
  std::vector<Offset> offsets;
  const int r = static_cast<int>(std::floor(tolerance_px));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double d = std::hypot(dx, dy);
      if (d <= tolerance_px) offsets.push_back({d, dy, dx});
    }
  }
  std::sort(offsets.begin(), offsets.end(),
            [](const Offset& a, const Offset& b) { return std::tie(a.d, a.dy, a.dx) < std::tie(b.d, b.dy, b.dx); });

  PixelCounts c;
  Grid<std::uint8_t> taken(gt.height(), gt.width(), 0);
  for (auto v : gt.values()) c.gt_pixels += v != 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred(y, x)) continue;
      ++c.pred_pixels;
      for (const auto& o : offsets) {
        const int gy = y + o.dy;
        const int gx = x + o.dx;
        if (gt.contains(gy, gx) && gt(gy, gx) && !taken(gy, gx)) {
          taken(gy, gx) = 1;
          ++c.matched;
          break;
        }
      }
    }
  }
  return c;
}

double heatmap_f(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth,
                 const HeatmapFParams& params) {
  check_lengths(predictions, ground_truth);
  if (params.n_thresholds < 1) throw ConfigError("heatmap_f: n_thresholds must be at least 1");
  const int n_t = params.n_thresholds;
  const int s = params.eval_size;
  std::vector<PixelCounts> totals(n_t);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto gt_raster = rasterize(ground_truth[i], s, s, 1.0);
    for (int t = 0; t < n_t; ++t) {
      const double threshold = n_t == 1 ? 0.0 : static_cast<double>(t) / (n_t - 1);
      LineSet kept;
      for (const auto& l : predictions[i]) {
        if (l.score.value_or(1.0) >= threshold) kept.push_back(l);
      }
      const auto c = match_pixels(rasterize(kept, s, s, 1.0), gt_raster, params.tolerance_px);
      totals[t].matched += c.matched;
      totals[t].pred_pixels += c.pred_pixels;
      totals[t].gt_pixels += c.gt_pixels;
    }
  }
  double best = 0.0;
  bool any = false;
  for (const auto& c : totals) {
    if (c.pred_pixels == 0 && c.gt_pixels == 0) continue;
    any = true;
    const double p = c.pred_pixels ? static_cast<double>(c.matched) / static_cast<double>(c.pred_pixels) : 1.0;
    const double r = c.gt_pixels ? static_cast<double>(c.matched) / static_cast<double>(c.gt_pixels) : 1.0;
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    best = std::max(best, f);
  }
  return any ? best : 0.0;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["sap"] = nlohmann::ordered_json::object();
  for (auto [k, v] : sap) doc["sap"][std::to_string(k)] = v;
  doc["f_h"] = f_h;
  doc["primary_k"] = primary_k;
  doc["pr_points"] = nlohmann::ordered_json::array();
  for (const auto& p : pr_points) {
    doc["pr_points"].push_back({{"precision", p.precision}, {"recall", p.recall}, {"score", p.score}});
  }
  doc["counts"] = {{"n_pred", n_pred}, {"n_gt", n_gt}, {"n_images", n_images}};
  return doc.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& [k, v] : doc.at("sap").items()) r.sap[std::stoi(k)] = v.get<double>();
    r.f_h = doc.at("f_h").get<double>();
    r.primary_k = doc.at("primary_k").get<int>();
    for (const auto& p : doc.at("pr_points")) {
      r.pr_points.push_back({p.at("precision").get<double>(), p.at("recall").get<double>(), p.at("score").get<double>()});
    }
    const auto& c = doc.at("counts");
    r.n_pred = c.at("n_pred").get<long long>();
    r.n_gt = c.at("n_gt").get<long long>();
    r.n_images = c.at("n_images").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw MetricError(std::string("malformed eval report: ") + e.what());
  }
  return r;
}

EvalReport evaluate_lines(std::span<const LineSet> predictions, std::span<const LineSet> ground_truth,
                          std::span<const std::pair<int, int>> image_sizes, const MetricConfig& cfg) {
  check_lengths(predictions, ground_truth);
  if (image_sizes.size() != predictions.size()) throw MetricError("evaluate_lines: image size count mismatch");
  const int s = cfg.heatmap.eval_size;
  std::vector<LineSet> preds;
  std::vector<LineSet> gts;
  EvalReport report;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto [w, h] = image_sizes[i];
    preds.push_back(rescale_lines(predictions[i], w, h, s));
    gts.push_back(rescale_lines(ground_truth[i], w, h, s));
    report.n_pred += static_cast<long long>(predictions[i].size());
    report.n_gt += static_cast<long long>(ground_truth[i].size());
  }
  report.n_images = static_cast<int>(predictions.size());
  report.primary_k = cfg.primary_k;
  for (int k : cfg.sap_thresholds) report.sap[k] = structural_ap(preds, gts, k);
  report.pr_points = pr_curve(preds, gts, cfg.primary_k);
  if (!report.sap.count(cfg.primary_k)) report.sap[cfg.primary_k] = average_precision(report.pr_points);
  report.f_h = heatmap_f(preds, gts, cfg.heatmap);
  return report;
}

}  // namespace sslines
