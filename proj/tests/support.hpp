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

// Random generators and independent reference implementations shared by the
// unit tests and the acceptance runner.

#ifndef SSLINES_TESTS_SUPPORT_HPP_
#define SSLINES_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sslines/encoding.hpp"
#include "sslines/geometry.hpp"
#include "sslines/losses.hpp"
#include "sslines/metrics.hpp"
#include "sslines/rng.hpp"

namespace sslines::testing {

// ---------------------------------------------------------------------------
// Generators

inline Point random_point(Rng& rng, double w, double h) { return {rng.uniform(0.0, w), rng.uniform(0.0, h)}; }

inline LineSegment random_segment(Rng& rng, double w, double h, double min_length = 1.0) {
  for (;;) {
    LineSegment s{random_point(rng, w, h), random_point(rng, w, h), std::nullopt};
    if (s.length() >= min_length) return s;
  }
}

/// Up to `max_count` segments inside a w x h map whose midpoint cells are at
/// least `min_sep` cells apart (Chebyshev).
inline std::vector<LineSegment> separated_segments(Rng& rng, int w, int h, int max_count, double min_sep,
                                                   double min_length = 2.0, double max_length = 1e9) {
  std::vector<LineSegment> out;
  const int target = static_cast<int>(rng.uniform_int(1, max_count));
  for (int attempt = 0; attempt < 2000 && static_cast<int>(out.size()) < target; ++attempt) {
    LineSegment s = random_segment(rng, w, h, min_length);
    if (s.length() > max_length) continue;
    const Point m = s.midpoint();
    const bool ok = std::all_of(out.begin(), out.end(), [&](const LineSegment& o) {
      const Point q = o.midpoint();
      return std::max(std::abs(std::floor(m.x) - std::floor(q.x)), std::abs(std::floor(m.y) - std::floor(q.y))) >=
             min_sep;
    });
    if (ok) out.push_back(s);
  }
  return out;
}

inline FeatureMaps random_maps(Rng& rng, int c, int h, int w, double scale = 2.0) {
  FeatureMaps m(c, h, w);
  for (auto& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

/// A prediction set per image: perturbed copies of some gts plus clutter,
/// with scores drawn from a small set so ties occur.
inline std::vector<LineSet> jittered_predictions(Rng& rng, const std::vector<LineSet>& gts, double size,
                                                 int max_extra) {
  std::vector<LineSet> preds(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (const auto& g : gts[i]) {
      const int copies = static_cast<int>(rng.uniform_int(0, 2));
      for (int c = 0; c < copies; ++c) {
        LineSegment p = g;
        const double j = rng.uniform(0.0, 3.0);
        p.start = p.start + Point{rng.uniform(-j, j), rng.uniform(-j, j)};
        p.end = p.end + Point{rng.uniform(-j, j), rng.uniform(-j, j)};
        if (rng.bernoulli(0.5)) p = p.reversed();
        p.score = static_cast<double>(rng.uniform_int(1, 6)) / 6.0;
        preds[i].push_back(p);
      }
    }
    const int extra = static_cast<int>(rng.uniform_int(0, max_extra));
    for (int e = 0; e < extra; ++e) {
      LineSegment p = random_segment(rng, size, size, 1.0);
      p.score = static_cast<double>(rng.uniform_int(1, 6)) / 6.0;
      preds[i].push_back(p);
    }
  }
  return preds;
}

// ---------------------------------------------------------------------------
// Oracles

/// Maximum matching size by exhaustive search over assignments.
inline int brute_force_max_matching(const std::vector<std::vector<char>>& adj, std::size_t row, unsigned used) {
  if (row == adj.size()) return 0;
  int best = brute_force_max_matching(adj, row + 1, used);
  for (std::size_t j = 0; j < adj[row].size(); ++j) {
    if (adj[row][j] && !(used & (1u << j))) {
      best = std::max(best, 1 + brute_force_max_matching(adj, row + 1, used | (1u << j)));
    }
  }
  return best;
}

inline double oracle_sq_dist(const LineSegment& a, const LineSegment& b) {
  auto d2 = [](Point p, Point q) { return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y); };
  return std::min(d2(a.start, b.start) + d2(a.end, b.end), d2(a.start, b.end) + d2(a.end, b.start));
}

/// sAP where every prefix (by score level) is scored with an exhaustive
/// maximum assignment, recomputed from scratch.
inline double oracle_structural_ap(const std::vector<LineSet>& preds, const std::vector<LineSet>& gts, double k) {
  std::size_t n_gt = 0;
  for (const auto& g : gts) n_gt += g.size();
  if (n_gt == 0) return 0.0;
  std::vector<double> levels;
  for (const auto& p : preds) {
    for (const auto& l : p) levels.push_back(*l.score);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<double> prec, rec;
  for (double s : levels) {
    int tp = 0, np = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      std::vector<std::vector<char>> adj;
      for (const auto& p : preds[i]) {
        if (*p.score < s) continue;
        ++np;
        std::vector<char> row(gts[i].size());
        for (std::size_t j = 0; j < gts[i].size(); ++j) row[j] = oracle_sq_dist(p, gts[i][j]) <= k;
        adj.push_back(row);
      }
      tp += brute_force_max_matching(adj, 0, 0u);
    }
    prec.push_back(static_cast<double>(tp) / np);
    rec.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  double ap = 0.0, prev_r = 0.0;
  for (std::size_t i = 0; i < prec.size(); ++i) {
    double env = 0.0;
    for (std::size_t j = i; j < prec.size(); ++j) env = std::max(env, prec[j]);
    ap += (rec[i] - prev_r) * env;
    prev_r = rec[i];
  }
  return ap;
}

/// Greedy pixel matching by full scan: each predicted pixel in row-major
/// order takes the closest free gt pixel, first in row-major order on ties.
inline PixelCounts oracle_match_pixels(const Grid<std::uint8_t>& pred, const Grid<std::uint8_t>& gt, double tol) {
  PixelCounts c;
  std::vector<std::pair<int, int>> gt_px;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (gt(y, x)) gt_px.emplace_back(y, x);
    }
  }
  c.gt_pixels = static_cast<long long>(gt_px.size());
  std::vector<char> used(gt_px.size(), 0);
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred(y, x)) continue;
      ++c.pred_pixels;
      int best = -1;
      double best_d = 0.0;
      for (std::size_t j = 0; j < gt_px.size(); ++j) {
        if (used[j]) continue;
        const double d = std::hypot(gt_px[j].first - y, gt_px[j].second - x);
        if (d <= tol && (best < 0 || d < best_d)) {
          best = static_cast<int>(j);
          best_d = d;
        }
      }
      if (best >= 0) {
        used[best] = 1;
        ++c.matched;
      }
    }
  }
  return c;
}

/// Pixel set of segments by brute-force distance test: pixel (i, j) is set
/// when the segment meets the square of half-width t/2 around its center.
inline Grid<std::uint8_t> oracle_rasterize(const std::vector<LineSegment>& lines, int h, int w, double t) {
  Grid<std::uint8_t> g(h, w, 0);
  for (const auto& l : lines) {
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const double x0 = i + 0.5 - t / 2, x1 = i + 0.5 + t / 2;
        const double y0 = j + 0.5 - t / 2, y1 = j + 0.5 + t / 2;
        // Liang-Barsky against the half-open square, with a closed test
        // shrunk by a hair on the open side.
        const double eps = 1e-12;
        double u0 = 0.0, u1 = 1.0;
        const double dx = l.end.x - l.start.x, dy = l.end.y - l.start.y;
        const double p[4] = {-dx, dx, -dy, dy};
        const double q[4] = {l.start.x - x0, x1 - eps - l.start.x, l.start.y - y0, y1 - eps - l.start.y};
        bool hit = true;
        for (int e = 0; e < 4 && hit; ++e) {
          if (p[e] == 0.0) {
            if (q[e] < 0.0) hit = false;
          } else {
            const double r = q[e] / p[e];
            if (p[e] < 0.0) u0 = std::max(u0, r);
            else u1 = std::min(u1, r);
          }
        }
        if (hit && u0 <= u1) g(j, i) = 1;
      }
    }
  }
  return g;
}

/// Relative error between two gradient vectors in the 2-norm.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / denom;
}

/// Central differences of f at x for every coordinate.
inline std::vector<double> numeric_gradient(const std::function<double(const FeatureMaps&)>& f, FeatureMaps x,
                                            double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.values()[i];
    x.values()[i] = keep + step;
    const double up = f(x);
    x.values()[i] = keep - step;
    const double down = f(x);
    x.values()[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Moves every regression value at least `gap` away from its L1 kink.
inline void avoid_kinks(FeatureMaps& pred, const FeatureMaps& target, double gap) {
  for (int c = 0; c < pred.channels(); ++c) {
    if (ChannelLayout::is_classification(c)) continue;
    auto p = pred.plane(c);
    auto t = target.plane(c);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::abs(p[i] - t[i]) < gap) p[i] = t[i] + (p[i] >= t[i] ? gap : -gap);
    }
  }
}

}  // namespace sslines::testing

#endif  // SSLINES_TESTS_SUPPORT_HPP_
