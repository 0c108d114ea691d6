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

#include <cmath>

#include "doctest.h"
#include "sslines/geometry.hpp"
#include "support.hpp"

using namespace sslines;
using sslines::testing::random_segment;

namespace {

bool near(Point a, Point b, double tol) { return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol; }

LineSegment seg(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y1}, std::nullopt}; }

}  // namespace

TEST_CASE("tripoint of axis-aligned segments") {
  TriPoint a = to_tripoint(seg(0, 0, 4, 0));
  CHECK(a.center == Point{2, 0});
  CHECK(a.disp_start == Point{-2, 0});
  CHECK(a.disp_end == Point{2, 0});
  TriPoint b = to_tripoint(seg(1, 1, 1, 9));
  CHECK(b.center == Point{1, 5});
  CHECK(b.disp_start == Point{0, -4});
  CHECK(b.disp_end == Point{0, 4});
  LineSegment back = from_tripoint(a);
  CHECK(back.start == Point{0, 0});
  CHECK(back.end == Point{4, 0});
}

TEST_CASE("degenerate tripoints are rejected") {
  CHECK_THROWS_AS(to_tripoint(seg(3, 3, 3, 3)), GeometryError);
  CHECK_THROWS_AS(from_tripoint(TriPoint{{5, 5}, {0, 0}, {0, 0}}), GeometryError);
  CHECK_THROWS_AS(to_tripoint(seg(0, 0, NAN, 1)), GeometryError);
}

TEST_CASE("tripoint round trip over random segments") {
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LineSegment s = random_segment(rng, 512, 512, 0.01);
    LineSegment r = from_tripoint(to_tripoint(s));
    worst = std::max({worst, distance(r.start, s.start), distance(r.end, s.end)});
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("sol_split short and long segments") {
  SolChain c = sol_split(seg(0, 0, 16, 0), 32, 0.5);
  REQUIRE(c.segments.size() == 1);
  LineSegment only = from_tripoint(c.segments[0]);
  CHECK(near(only.start, {0, 0}, 1e-12));
  CHECK(near(only.end, {16, 0}, 1e-12));

  SolChain d = sol_split(seg(0, 10, 64, 10), 32, 0.5);
  REQUIRE(d.intervals.size() == 3);
  const double expect[3][2] = {{0.0, 0.5}, {0.25, 0.75}, {0.5, 1.0}};
  for (int i = 0; i < 3; ++i) {
    CHECK(d.intervals[i].first == doctest::Approx(expect[i][0]).epsilon(1e-12));
    CHECK(d.intervals[i].second == doctest::Approx(expect[i][1]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sol_split(seg(0, 0, 64, 0), 32, 0.95), ConfigError);
  CHECK_THROWS_AS(sol_split(seg(0, 0, 64, 0), 32, -0.1), ConfigError);
}

TEST_CASE("sol_split intervals cover the parent with overlap") {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    LineSegment s = random_segment(rng, 256, 256, 1.0);
    const double sol = rng.uniform(4.0, 64.0);
    const double overlap = rng.uniform(0.0, 0.9);
    SolChain c = sol_split(s, sol, overlap);
    REQUIRE(!c.intervals.empty());
    CHECK(c.intervals.front().first == 0.0);
    CHECK(c.intervals.back().second == 1.0);
    for (std::size_t j = 0; j + 1 < c.intervals.size(); ++j) {
      // consecutive pieces overlap, so the union is connected
      CHECK(c.intervals[j + 1].first <= c.intervals[j].second + 1e-12);
      CHECK(c.intervals[j + 1].first >= c.intervals[j].first);
    }
    for (std::size_t j = 0; j < c.segments.size(); ++j) {
      LineSegment piece = from_tripoint(c.segments[j]);
      CHECK(piece.length() <= std::max(sol, s.length()) + 1e-9);
    }
  }
}

TEST_CASE("flip and rotation examples") {
  std::vector<LineSegment> lines{seg(10, 20, 30, 40)};
  auto h = transform_lines(GeomTransform::hflip(128, 128), lines);
  REQUIRE(h.size() == 1);
  CHECK(h[0].start == Point{118, 20});
  CHECK(h[0].end == Point{98, 40});
  auto r = transform_lines(GeomTransform::rot90(2, 128, 128), lines);
  REQUIRE(r.size() == 1);
  CHECK(near(r[0].start, {118, 108}, 1e-12));
  CHECK(near(r[0].end, {98, 88}, 1e-12));
}

TEST_CASE("crop clips a diagonal at the window boundary") {
  std::vector<LineSegment> lines{seg(0, 0, 128, 128)};
  auto t = GeomTransform::crop_resize({32, 32, 96, 96}, 128, 128, 64, 64);
  auto out = transform_lines(t, lines);
  REQUIRE(out.size() == 1);
  CHECK(near(out[0].start, {0, 0}, 1e-9));
  CHECK(near(out[0].end, {64, 64}, 1e-9));
  CHECK_THROWS_AS(GeomTransform::crop_resize({-1, 0, 10, 10}, 128, 128, 8, 8), GeometryError);
}

TEST_CASE("transforms invert exactly and keep lines in bounds") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const int w = static_cast<int>(rng.uniform_int(16, 200));
    const int h = static_cast<int>(rng.uniform_int(16, 200));
    GeomTransform t;
    switch (rng.uniform_int(0, 3)) {
      case 0: t = GeomTransform::hflip(w, h); break;
      case 1: t = GeomTransform::vflip(w, h); break;
      case 2: t = GeomTransform::rot90(static_cast<int>(rng.uniform_int(0, 3)), w, h); break;
      default: {
        const double x0 = rng.uniform(0, w / 2.0), y0 = rng.uniform(0, h / 2.0);
        t = GeomTransform::crop_resize({x0, y0, rng.uniform(x0 + 4, w), rng.uniform(y0 + 4, h)}, w, h, 64, 48);
      }
    }
    std::vector<LineSegment> lines;
    for (int k = 0; k < 5; ++k) lines.push_back(random_segment(rng, w, h, 3.0));
    auto out = transform_lines(t, lines);
    if (t.kind != TransformKind::kCropResize) {
      REQUIRE(out.size() == lines.size());
      for (std::size_t k = 0; k < out.size(); ++k) {
        CHECK(near(t.unmap(out[k].start), lines[k].start, 1e-6));
        CHECK(near(t.unmap(out[k].end), lines[k].end, 1e-6));
      }
    }
    for (const auto& l : out) {
      for (Point p : {l.start, l.end}) {
        CHECK(p.x >= -1e-9);
        CHECK(p.y >= -1e-9);
        CHECK(p.x <= t.dst_width + 1e-9);
        CHECK(p.y <= t.dst_height + 1e-9);
      }
    }
  }
}

TEST_CASE("image transforms agree with point maps") {
  Image img(1, 8, 12, 0.0f);
  img(0, 2, 3) = 1.0f;  // pixel centered at (3.5, 2.5)
  for (int k = 0; k < 4; ++k) {
    auto t = GeomTransform::rot90(k, 12, 8);
    Image out = transform_image(t, img);
    CHECK(out.width() == t.dst_width);
    CHECK(out.height() == t.dst_height);
    Point p = t.map({3.5, 2.5});
    CHECK(out(0, static_cast<int>(p.y), static_cast<int>(p.x)) == 1.0f);
  }
  Image f = transform_image(GeomTransform::hflip(12, 8), img);
  CHECK(f(0, 2, 8) == 1.0f);
}

TEST_CASE("rasterize examples") {
  CHECK(rasterize({}, 16, 16).values().size() == 256);
  auto empty = rasterize({}, 16, 16);
  CHECK(std::count(empty.values().begin(), empty.values().end(), 1) == 0);
  std::vector<LineSegment> h{seg(0, 5, 10, 5)};
  auto g = rasterize(h, 16, 16, 1.0);
  int count = 0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const bool expect = y == 5 && x <= 10;
      CHECK(static_cast<bool>(g(y, x)) == expect);
      count += g(y, x);
    }
  }
  CHECK(count == 11);
  CHECK_THROWS_AS(rasterize(h, 4, 16), GeometryError);
}

TEST_CASE("rasterize matches the brute-force pixel test") {
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    std::vector<LineSegment> lines{random_segment(rng, 32, 32, 0.5)};
    const double t = rng.uniform(0.5, 4.0);
    CHECK(rasterize(lines, 32, 32, t) == sslines::testing::oracle_rasterize(lines, 32, 32, t));
  }
  std::vector<LineSegment> diag{seg(0, 0, 10, 10)};
  auto g = rasterize(diag, 16, 16, 1.0);
  CHECK(std::count(g.values().begin(), g.values().end(), 1) == 11);
}

TEST_CASE("rasterize is monotone in thickness") {
  Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    std::vector<LineSegment> lines{random_segment(rng, 40, 40), random_segment(rng, 40, 40)};
    const double a = rng.uniform(0.2, 3.0);
    const double b = a + rng.uniform(0.0, 3.0);
    auto ga = rasterize(lines, 40, 40, a);
    auto gb = rasterize(lines, 40, 40, b);
    for (std::size_t k = 0; k < ga.size(); ++k) CHECK((!ga.values()[k] || gb.values()[k]));
  }
}
