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
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "sslines/data.hpp"
#include "support.hpp"

using namespace sslines;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sslines_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

DatasetManifest numbered(int n) {
  DatasetManifest m;
  m.name = "numbered";
  for (int i = 0; i < n; ++i) m.samples.push_back({"s" + std::to_string(i), "s.ppm", 8, 8, std::nullopt});
  return m;
}

// Largest distance from points sampled along each segment to the traced
// boundary vertices.
double max_boundary_distance(const std::vector<LineSegment>& lines, const Grid<std::uint8_t>& mask) {
  std::vector<Point> boundary;
  for (const auto& loop : trace_boundaries(mask)) {
    for (std::size_t i = 0; i < loop.points.size(); ++i) {
      const Point a = loop.points[i], b = loop.points[(i + 1) % loop.points.size()];
      const int steps = static_cast<int>(std::ceil(distance(a, b) * 4)) + 1;
      for (int k = 0; k <= steps; ++k) boundary.push_back(a + (b - a) * (static_cast<double>(k) / steps));
    }
  }
  double worst = 0.0;
  for (const auto& l : lines) {
    for (int k = 0; k <= 50; ++k) {
      const Point p = l.point_at(k / 50.0);
      double best = INFINITY;
      for (Point q : boundary) best = std::min(best, distance(p, q));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

bool has_segment(const std::vector<LineSegment>& lines, LineSegment want, double tol) {
  for (const auto& l : lines) {
    const bool direct = distance(l.start, want.start) <= tol && distance(l.end, want.end) <= tol;
    const bool flipped = distance(l.start, want.end) <= tol && distance(l.end, want.start) <= tol;
    if (direct || flipped) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("manifest round trip and validation") {
  const std::string text = R"({"name": "tiny", "role": "train", "samples": [
    {"image_id": "a", "image_path": "a.ppm", "width": 20, "height": 10, "lines": [[1, 1, 5, 5], [3, 3, 3, 3]]},
    {"image_id": "b", "image_path": "b.ppm", "width": 20, "height": 10, "lines": null}]})";
  auto loaded = parse_manifest(text);
  REQUIRE(loaded.manifest.samples.size() == 2);
  CHECK(loaded.report.dropped_lines == 1);
  CHECK(loaded.manifest.samples[0].lines->size() == 1);
  CHECK(!loaded.manifest.samples[1].labeled());
  auto again = parse_manifest(serialize_manifest(loaded.manifest));
  CHECK(serialize_manifest(again.manifest) == serialize_manifest(loaded.manifest));
  CHECK(again.report.dropped_lines == 0);
}

TEST_CASE("manifest lines are clipped to the image") {
  const std::string text = R"({"name": "c", "role": "test", "samples": [
    {"image_id": "a", "image_path": "a.ppm", "width": 20, "height": 10, "lines": [[-10, 5, 10, 5], [30, 30, 40, 40]]}]})";
  auto loaded = parse_manifest(text);
  CHECK(loaded.report.clipped_lines == 1);
  CHECK(loaded.report.dropped_lines == 1);
  const auto& l = loaded.manifest.samples[0].lines->at(0);
  CHECK(std::min(l.start.x, l.end.x) == 0.0);
  CHECK(loaded.manifest.role == ManifestRole::kTest);
}

TEST_CASE("manifest errors are distinct") {
  CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.json"), ManifestNotFoundError);
  CHECK_THROWS_AS(parse_manifest("{not json"), ManifestFormatError);
  CHECK_THROWS_AS(parse_manifest(R"({"name": "x", "role": "train", "samples": [{"image_id": "a"}]})"),
                  ManifestFormatError);
  CHECK_THROWS_AS(parse_manifest(R"({"name": "x", "role": "bogus", "samples": []})"), ManifestFormatError);
  const std::string dup = R"({"name": "x", "role": "train", "samples": [
    {"image_id": "a", "image_path": "a.ppm", "width": 4, "height": 4, "lines": null},
    {"image_id": "a", "image_path": "b.ppm", "width": 4, "height": 4, "lines": null}]})";
  try {
    parse_manifest(dup);
    FAIL("expected DuplicateIdError");
  } catch (const DuplicateIdError& e) {
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
}

TEST_CASE("manifest files resolve relative paths") {
  auto dir = temp_dir("manifest");
  write_text(dir / "m.json",
             R"({"name": "x", "role": "val", "samples": [{"image_id": "a", "image_path": "img/a.ppm", "width": 4, "height": 4, "lines": []}]})");
  auto loaded = load_manifest(dir / "m.json");
  CHECK(loaded.manifest.resolve(loaded.manifest.samples[0]) == dir / "img/a.ppm");
  CHECK(loaded.manifest.find("a") != nullptr);
  CHECK(loaded.manifest.find("b") == nullptr);
  fs::remove_all(dir);
}

TEST_CASE("split fractions") {
  CHECK(parse_fraction("1/8").denominator == 8);
  CHECK(parse_fraction("1").denominator == 1);
  CHECK(parse_fraction("0.25").denominator == 4);
  CHECK_THROWS_AS(parse_fraction("1/3"), ConfigError);
  CHECK_THROWS_AS(parse_fraction("half"), ConfigError);
  CHECK_THROWS_AS(fraction_from_value(0.3), ConfigError);
}

TEST_CASE("split of 250 samples at one half") {
  auto m = numbered(250);
  auto s = make_split(m, SplitFraction{2}, 5);
  CHECK(s.labeled_ids.size() == 125);
  CHECK(s.unlabeled_ids.size() == 125);
  auto t = make_split(m, SplitFraction{2}, 5);
  CHECK(s.labeled_ids == t.labeled_ids);
  CHECK(s.unlabeled_ids == t.unlabeled_ids);
  auto full = make_split(m, SplitFraction{1}, 5);
  CHECK(full.unlabeled_ids.empty());
  CHECK(full.labeled_ids.size() == 250);
}

TEST_CASE("splits partition the manifest") {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 300));
    const int denom = 1 << rng.uniform_int(0, 4);
    auto m = numbered(n);
    auto s = make_split(m, SplitFraction{denom}, rng.next_u64());
    CHECK(static_cast<long>(s.labeled_ids.size()) == std::lround(static_cast<double>(n) / denom));
    std::set<std::string> all(s.labeled_ids.begin(), s.labeled_ids.end());
    for (const auto& id : s.unlabeled_ids) CHECK(all.insert(id).second);
    CHECK(static_cast<int>(all.size()) == n);
  }
}

TEST_CASE("split files round trip") {
  auto dir = temp_dir("split");
  auto s = make_split(numbered(40), SplitFraction{8}, 3);
  write_text(dir / "split.json", serialize_split(s));
  auto back = load_split(dir / "split.json");
  CHECK(back.fraction.denominator == 8);
  CHECK(back.seed == 3);
  CHECK(back.labeled_ids == s.labeled_ids);
  CHECK(back.unlabeled_ids == s.unlabeled_ids);
  fs::remove_all(dir);
}

TEST_CASE("validation carve") {
  auto m = numbered(30);
  auto [train, val] = carve_validation(m, 10, 1);
  CHECK(train.samples.size() == 20);
  CHECK(val.samples.size() == 10);
  CHECK(val.role == ManifestRole::kVal);
  std::set<std::string> ids;
  for (const auto& s : train.samples) ids.insert(s.image_id);
  for (const auto& s : val.samples) CHECK(ids.insert(s.image_id).second);
  auto [train2, val2] = carve_validation(m, 10, 1);
  CHECK(serialize_manifest(val2) == serialize_manifest(val));
  CHECK_THROWS_AS(carve_validation(m, 31, 1), ConfigError);
}

TEST_CASE("mask extraction: empty mask") {
  Grid<std::uint8_t> mask(32, 32, 0);
  CHECK(extract_lines_from_mask(mask).empty());
}

TEST_CASE("mask extraction: centered rectangle") {
  Grid<std::uint8_t> mask(64, 64, 0);
  for (int y = 16; y < 48; ++y) {
    for (int x = 12; x < 52; ++x) mask(y, x) = 1;
  }
  auto lines = extract_lines_from_mask(mask);
  CHECK(lines.size() == 4);
  const LineSegment sides[4] = {{{12, 16}, {52, 16}, {}}, {{52, 16}, {52, 48}, {}}, {{52, 48}, {12, 48}, {}},
                                {{12, 48}, {12, 16}, {}}};
  for (const auto& s : sides) CHECK(has_segment(lines, s, 1.0));
}

TEST_CASE("mask extraction: full-height stripe") {
  Grid<std::uint8_t> mask(64, 64, 0);
  for (int y = 0; y < 64; ++y) {
    for (int x = 22; x < 42; ++x) mask(y, x) = 1;
  }
  auto lines = extract_lines_from_mask(mask);
  CHECK(lines.size() == 2);
  CHECK(has_segment(lines, {{22, 0}, {22, 64}, {}}, 1.0));
  CHECK(has_segment(lines, {{42, 0}, {42, 64}, {}}, 1.0));
}

TEST_CASE("extracted lines stay near the mask boundary") {
  Rng rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    Grid<std::uint8_t> mask(48, 48, 0);
    const int blobs = static_cast<int>(rng.uniform_int(1, 3));
    for (int b = 0; b < blobs; ++b) {
      const double cx = rng.uniform(8, 40), cy = rng.uniform(8, 40), rx = rng.uniform(4, 14), ry = rng.uniform(4, 14);
      for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
          const double u = (x + 0.5 - cx) / rx, v = (y + 0.5 - cy) / ry;
          if (u * u + v * v <= 1.0) mask(y, x) = 1;
        }
      }
    }
    MaskExtractParams p;
    p.min_length = 3.0;
    auto lines = extract_lines_from_mask(mask, p);
    CHECK(max_boundary_distance(lines, mask) <= p.epsilon + 1.0);
  }
}

TEST_CASE("boundary loops are closed crack paths") {
  Grid<std::uint8_t> mask(8, 8, 0);
  mask(2, 2) = mask(2, 3) = mask(3, 2) = 1;
  auto loops = trace_boundaries(mask);
  REQUIRE(loops.size() == 1);
  const auto& pts = loops[0].points;
  CHECK(pts.size() == 6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point d = pts[(i + 1) % pts.size()] - pts[i];
    CHECK((d.x == 0.0 || d.y == 0.0));
  }
  std::vector<Point> flat{{0, 0}, {5, 0.5}, {10, 0}, {15, 0.4}, {20, 0}};
  CHECK(simplify_polyline(flat, 1.0).size() == 2);
  std::vector<Point> spike{{0, 0}, {5, 3.2}, {10, 6}, {15, 2.8}, {20, 0}};
  auto simple = simplify_polyline(spike, 1.0);
  REQUIRE(simple.size() == 3);
  CHECK(simple[1] == Point{10, 6});
}

TEST_CASE("synthetic scenes") {
  auto a = synth_line_dataset(12, 64, 3);
  auto b = synth_line_dataset(12, 64, 3);
  CHECK(serialize_manifest(a.manifest) == serialize_manifest(b.manifest));
  REQUIRE(a.images.size() == 12);
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    CHECK(a.images[i] == b.images[i]);
    const auto& s = a.manifest.samples[i];
    CHECK(s.lines->size() >= 2);
    CHECK(s.lines->size() <= 8);
    for (const auto& l : *s.lines) {
      for (Point p : {l.start, l.end}) {
        CHECK(p.x >= 0.0);
        CHECK(p.y >= 0.0);
        CHECK(p.x <= 64.0);
        CHECK(p.y <= 64.0);
      }
    }
    auto truth = rasterize(*s.lines, 64, 64, 2.0);
    auto bright = bright_pixels(a.images[i], 0.6f);
    long inter = 0, uni = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      inter += truth.values()[k] && bright.values()[k];
      uni += truth.values()[k] || bright.values()[k];
    }
    CHECK(static_cast<double>(inter) / uni > 0.5);
  }
  CHECK_THROWS_AS(synth_line_dataset(0, 64, 1), ConfigError);
}

TEST_CASE("synthetic dataset on disk") {
  auto dir = temp_dir("synth");
  auto data = synth_line_dataset(3, 32, 4);
  write_synth_dataset(data, dir);
  auto loaded = load_manifest(dir / "manifest.json");
  CHECK(loaded.manifest.samples.size() == 3);
  CHECK(fs::exists(loaded.manifest.resolve(loaded.manifest.samples[0])));
  fs::remove_all(dir);
}
