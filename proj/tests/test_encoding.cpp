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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sslines/encoding.hpp"
#include "support.hpp"

using namespace sslines;
namespace st = sslines::testing;

namespace {

LineSegment seg(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y1}, std::nullopt}; }

double endpoint_error(const LineSegment& a, const LineSegment& b) {
  const double direct = std::max(distance(a.start, b.start), distance(a.end, b.end));
  const double swapped = std::max(distance(a.start, b.end), distance(a.end, b.start));
  return std::min(direct, swapped);
}

}  // namespace

TEST_CASE("channel layout") {
  CHECK(ChannelLayout::kNumChannels == 16);
  CHECK(ChannelLayout::kInferenceChannels == 5);
  CHECK(kTpBlock.center == 0);
  CHECK(kTpBlock.disp == 1);
  CHECK(kSolBlock.center == 7);
  int n_class = 0;
  for (int c = 0; c < 16; ++c) n_class += ChannelLayout::is_classification(c);
  CHECK(n_class == 4);
}

TEST_CASE("encoding an empty list gives zero maps") {
  auto gt = encode_ground_truth({}, 16, 16);
  CHECK(std::all_of(gt.maps.values().begin(), gt.maps.values().end(), [](double v) { return v == 0.0; }));
  CHECK(std::count(gt.regression_mask.values().begin(), gt.regression_mask.values().end(), 1) == 0);
}

TEST_CASE("encoding a single horizontal segment") {
  std::vector<LineSegment> lines{seg(8, 8, 24, 8)};
  auto gt = encode_ground_truth(lines, 32, 32, {}, 0);
  CHECK(gt.maps(kTpBlock.center, 8, 16) == 1.0);
  CHECK(gt.maps(kTpBlock.disp + 0, 8, 16) == -8.0);
  CHECK(gt.maps(kTpBlock.disp + 1, 8, 16) == 0.0);
  CHECK(gt.maps(kTpBlock.disp + 2, 8, 16) == 8.0);
  CHECK(gt.maps(kTpBlock.disp + 3, 8, 16) == 0.0);
  CHECK(gt.maps(kTpBlock.length, 8, 16) == doctest::Approx(16.0 / (32.0 * std::sqrt(2.0))));
  CHECK(gt.maps(kTpBlock.degree, 8, 16) == 0.0);
  CHECK(std::count(gt.regression_mask.values().begin(), gt.regression_mask.values().end(), 1) == 1);
  double center_sum = 0.0;
  for (double v : gt.maps.plane(kTpBlock.center)) center_sum += v;
  CHECK(center_sum == 1.0);

  auto decoded = decode_lines(ideal_feature_maps(gt), {});
  REQUIRE(decoded.size() == 1);
  CHECK(endpoint_error(decoded[0], lines[0]) < 1e-12);
}

TEST_CASE("encoding rejects lines outside the map") {
  std::vector<LineSegment> lines{seg(2, 2, 40, 2)};
  CHECK_THROWS_AS(encode_ground_truth(lines, 32, 32), GeometryError);
  std::vector<LineSegment> degenerate{seg(2, 2, 2, 2)};
  CHECK_THROWS_AS(encode_ground_truth(degenerate, 32, 32), GeometryError);
}

TEST_CASE("crossing segments: junctions and line channel") {
  std::vector<LineSegment> lines{seg(4, 4, 28, 28), seg(4, 28, 28, 4)};
  auto gt = encode_ground_truth(lines, 32, 32);
  int junctions = 0;
  for (double v : gt.maps.plane(ChannelLayout::kSegJunction)) junctions += v == 1.0;
  CHECK(junctions == 4);
  CHECK(gt.maps(ChannelLayout::kSegJunction, 4, 4) == 1.0);
  CHECK(gt.maps(ChannelLayout::kSegJunction, 4, 28) == 1.0);
  auto oracle = st::oracle_rasterize(lines, 32, 32, 1.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) CHECK(gt.maps(ChannelLayout::kSegLine, y, x) == oracle(y, x));
  }
}

TEST_CASE("regression channels vanish off the mask") {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    auto lines = st::separated_segments(rng, 32, 32, 8, 1.0);
    for (int radius : {0, 1, 2}) {
      auto gt = encode_ground_truth(lines, 32, 32, {}, radius);
      for (int c = 0; c < 16; ++c) {
        if (ChannelLayout::is_classification(c)) {
          for (double v : gt.maps.plane(c)) CHECK((v >= 0.0 && v <= 1.0));
          continue;
        }
        const auto& mask = c < kSolBlock.center ? gt.regression_mask : gt.sol_regression_mask;
        auto plane = gt.maps.plane(c);
        for (std::size_t k = 0; k < plane.size(); ++k) {
          if (!mask.values()[k]) CHECK(plane[k] == 0.0);
        }
      }
    }
  }
}

TEST_CASE("neighbor cells regress the nearest segment") {
  std::vector<LineSegment> lines{seg(8, 8, 24, 8)};
  auto gt = encode_ground_truth(lines, 32, 32, {}, 1);
  CHECK(std::count(gt.regression_mask.values().begin(), gt.regression_mask.values().end(), 1) == 9);
  // cell (17, 9) has anchor (17, 9)
  CHECK(gt.maps(kTpBlock.center, 9, 17) == 0.0);
  CHECK(gt.maps(kTpBlock.disp + 0, 9, 17) == -9.0);
  CHECK(gt.maps(kTpBlock.disp + 1, 9, 17) == -1.0);
  CHECK(gt.maps(kTpBlock.disp + 2, 9, 17) == 7.0);
  CHECK_THROWS_AS(encode_ground_truth(lines, 32, 32, {}, -1), ConfigError);
}

TEST_CASE("decode all-zero maps") {
  FeatureMaps zero(16, 16, 16, 0.0);
  CHECK(decode_lines(zero, {}).size() == 0);
  FeatureMaps low(16, 16, 16, -10.0);
  CHECK(decode_lines(low, {}).empty());
}

TEST_CASE("decode honours topk with tied maxima in scan order") {
  FeatureMaps maps(16, 16, 16, -10.0);
  for (auto [x, y] : {std::pair{3, 3}, std::pair{10, 10}}) {
    maps(0, y, x) = 5.0;
    maps(1, y, x) = -2.0;
    maps(3, y, x) = 2.0;
  }
  DecodeParams p;
  p.topk = 1;
  auto peaks = decode_peaks(maps, p);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].peak_x == 3);
  CHECK(peaks[0].peak_y == 3);
  p.topk = 10;
  CHECK(decode_peaks(maps, p).size() == 2);
}

TEST_CASE("decode output is sorted and bounded by topk") {
  Rng rng(22);
  for (int i = 0; i < 50; ++i) {
    FeatureMaps maps = st::random_maps(rng, 16, 16, 16, 4.0);
    DecodeParams p;
    p.topk = static_cast<int>(rng.uniform_int(1, 30));
    auto lines = decode_lines(maps, p);
    CHECK(lines.size() <= static_cast<std::size_t>(p.topk));
    for (std::size_t k = 1; k < lines.size(); ++k) CHECK(*lines[k - 1].score >= *lines[k].score);
  }
}

TEST_CASE("encode-decode round trip on well separated sets") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    auto lines = st::separated_segments(rng, 64, 64, 32, 3.0, 2.0);
    auto gt = encode_ground_truth(lines, 64, 64);
    DecodeParams p;
    p.topk = 1000;
    auto decoded = decode_lines(ideal_feature_maps(gt), p);
    REQUIRE(decoded.size() == lines.size());
    for (const auto& l : lines) {
      double best = INFINITY;
      for (const auto& d : decoded) best = std::min(best, endpoint_error(d, l));
      CHECK(best <= 1.0);
    }
  }
}

TEST_CASE("match_lines basics") {
  std::vector<LineSegment> a{seg(0, 0, 10, 0), seg(0, 20, 10, 20)};
  auto same = match_lines(a, a);
  REQUIRE(same.size() == 2);
  for (const auto& m : same) {
    CHECK(m.pred == m.gt);
    CHECK(m.distance == 0.0);
  }
  std::vector<LineSegment> far{seg(100, 100, 110, 100)};
  CHECK(match_lines(a, far, 5.0).empty());
  std::vector<LineSegment> rev{a[0].reversed()};
  auto r = match_lines(rev, a);
  REQUIRE(r.size() == 1);
  CHECK(r[0].swapped);
  CHECK(r[0].distance == 0.0);
}

TEST_CASE("match_lines agrees with the exhaustive minimum-cost assignment") {
  Rng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    auto gt = st::separated_segments(rng, 64, 64, 6, 6.0, 4.0);
    const int n = static_cast<int>(gt.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<LineSegment> pred(n);
    for (int i = 0; i < n; ++i) {
      LineSegment p = gt[perm[i]];
      p.start = p.start + Point{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      p.end = p.end + Point{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      pred[i] = i == 0 ? p.reversed() : p;
    }
    auto m = match_lines(pred, gt, 1e9);
    REQUIRE(static_cast<int>(m.size()) == n);
    // exhaustive assignment
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    double best_cost = INFINITY;
    std::vector<int> best;
    do {
      double cost = 0.0;
      for (int i = 0; i < n; ++i) cost += structural_distance(pred[i], gt[order[i]]);
      if (cost < best_cost) {
        best_cost = cost;
        best = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    for (const auto& pair : m) CHECK(best[pair.pred] == pair.gt);
  }
}

TEST_CASE("match_lines is symmetric under endpoint reversal") {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LineSegment> pred, gt;
    for (int i = 0; i < 5; ++i) pred.push_back(st::random_segment(rng, 32, 32));
    for (int i = 0; i < 5; ++i) gt.push_back(st::random_segment(rng, 32, 32));
    auto base = match_lines(pred, gt, 20.0);
    std::vector<LineSegment> flipped = pred;
    for (auto& p : flipped) {
      if (rng.bernoulli(0.5)) p = p.reversed();
    }
    auto other = match_lines(flipped, gt, 20.0);
    REQUIRE(base.size() == other.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(base[i].pred == other[i].pred);
      CHECK(base[i].gt == other[i].gt);
      CHECK(base[i].distance == doctest::Approx(other[i].distance).epsilon(1e-12));
    }
  }
}
