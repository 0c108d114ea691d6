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

#include "sslines/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sslines/image.hpp"

namespace sslines {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Manifest

std::string to_string(ManifestRole role) {
  switch (role) {
    case ManifestRole::kTrain:
      return "train";
    case ManifestRole::kVal:
      return "val";
    case ManifestRole::kTest:
      return "test";
  }
  return "train";
}

ManifestRole parse_role(const std::string& s) {
  if (s == "train") return ManifestRole::kTrain;
  if (s == "val") return ManifestRole::kVal;
  if (s == "test") return ManifestRole::kTest;
  throw ManifestFormatError("unknown manifest role '" + s + "'");
}

std::filesystem::path DatasetManifest::resolve(const Sample& s) const {
  std::filesystem::path p(s.image_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

const Sample* DatasetManifest::find(const std::string& image_id) const {
  for (const auto& s : samples) {
    if (s.image_id == image_id) return &s;
  }
  return nullptr;
}

LoadedManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestFormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  LoadedManifest out;
  auto& m = out.manifest;
  m.base_dir = base_dir;
  try {
    if (!doc.is_object()) throw ManifestFormatError("manifest must be a JSON object");
    m.name = doc.at("name").get<std::string>();
    m.role = parse_role(doc.at("role").get<std::string>());
    std::set<std::string> seen;
    for (const auto& js : doc.at("samples")) {
      Sample s;
      s.image_id = js.at("image_id").get<std::string>();
      s.image_path = js.at("image_path").get<std::string>();
      s.width = js.at("width").get<int>();
      s.height = js.at("height").get<int>();
      if (s.width <= 0 || s.height <= 0) {
        throw ManifestFormatError("sample '" + s.image_id + "' has a non-positive size");
      }
      if (!seen.insert(s.image_id).second) throw DuplicateIdError("duplicate image_id '" + s.image_id + "'");
      const auto& jl = js.at("lines");
      if (!jl.is_null()) {
        std::vector<LineSegment> lines;
        for (const auto& q : jl) {
          if (!q.is_array() || q.size() != 4) {
            throw ManifestFormatError("sample '" + s.image_id + "': line entries must be [x1, y1, x2, y2]");
          }
          std::array<double, 4> v{};
          bool numeric = true;
          for (int k = 0; k < 4; ++k) {
            if (q[k].is_number()) {
              v[k] = q[k].get<double>();
            } else {
              numeric = false;
            }
          }
          LineSegment seg{{v[0], v[1]}, {v[2], v[3]}, std::nullopt};
          if (!numeric || !seg.is_finite() || seg.length() <= 0.0) {
            ++out.report.dropped_lines;
            continue;
          }
          auto clipped = clip_to_rect(seg, 0.0, 0.0, s.width, s.height);
          if (!clipped || clipped->length() <= 0.0) {
            ++out.report.dropped_lines;
            continue;
          }
          if (clipped->start != seg.start || clipped->end != seg.end) ++out.report.clipped_lines;
          lines.push_back(*clipped);
        }
        s.lines = std::move(lines);
      }
      m.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ManifestFormatError(std::string("malformed manifest: ") + e.what());
  }
  return out;
}

LoadedManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestNotFoundError("manifest not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& m) {
  json doc;
  doc["name"] = m.name;
  doc["role"] = to_string(m.role);
  doc["samples"] = json::array();
  for (const auto& s : m.samples) {
    json js;
    js["image_id"] = s.image_id;
    js["image_path"] = s.image_path;
    js["width"] = s.width;
    js["height"] = s.height;
    if (s.lines) {
      js["lines"] = json::array();
      for (const auto& l : *s.lines) js["lines"].push_back({l.start.x, l.start.y, l.end.x, l.end.y});
    } else {
      js["lines"] = nullptr;
    }
    doc["samples"].push_back(std::move(js));
  }
  return doc.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << serialize_manifest(manifest);
}

DatasetManifest subset(const DatasetManifest& manifest, std::span<const std::string> ids, ManifestRole role) {
  DatasetManifest out;
  out.name = manifest.name;
  out.role = role;
  out.base_dir = manifest.base_dir;
  for (const auto& id : ids) {
    const Sample* s = manifest.find(id);
    if (!s) throw DataError("unknown image_id '" + id + "' in split");
    out.samples.push_back(*s);
  }
  return out;
}

DatasetManifest strip_labels(const DatasetManifest& manifest) {
  DatasetManifest out = manifest;
  for (auto& s : out.samples) s.lines.reset();
  return out;
}

// ---------------------------------------------------------------------------
// Splits

SplitFraction parse_fraction(const std::string& s) {
  static const std::array<std::pair<const char*, int>, 5> kAllowed{
      {{"1", 1}, {"1/2", 2}, {"1/4", 4}, {"1/8", 8}, {"1/16", 16}}};
  for (auto [text, den] : kAllowed) {
    if (s == text) return {den};
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return fraction_from_value(v);
  } catch (const std::logic_error&) {
  }
  throw ConfigError("invalid split fraction '" + s + "' (expected 1/16, 1/8, 1/4, 1/2 or 1)");
}

SplitFraction fraction_from_value(double v) {
  for (int den : {1, 2, 4, 8, 16}) {
    if (std::abs(v - 1.0 / den) < 1e-12) return {den};
  }
  throw ConfigError("invalid split fraction " + std::to_string(v) + " (expected 1/16, 1/8, 1/4, 1/2 or 1)");
}

SplitSpec make_split(const DatasetManifest& manifest, SplitFraction fraction, std::uint64_t seed) {
  fraction_from_value(fraction.value());
  std::vector<std::string> ids;
  for (const auto& s : manifest.samples) ids.push_back(s.image_id);
  Rng rng(seed);
  rng.shuffle(ids.begin(), ids.end());
  const auto n_labeled = static_cast<std::size_t>(std::llround(fraction.value() * static_cast<double>(ids.size())));
  SplitSpec split;
  split.fraction = fraction;
  split.seed = seed;
  split.labeled_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_labeled));
  split.unlabeled_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_labeled), ids.end());
  return split;
}

std::string serialize_split(const SplitSpec& split) {
  json doc;
  doc["fraction"] = split.fraction.str();
  doc["seed"] = split.seed;
  doc["labeled_ids"] = split.labeled_ids;
  doc["unlabeled_ids"] = split.unlabeled_ids;
  return doc.dump(2) + "\n";
}

SplitSpec load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("split file not found: " + path.string());
  try {
    const json doc = json::parse(in);
    SplitSpec s;
    s.fraction = parse_fraction(doc.at("fraction").get<std::string>());
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.labeled_ids = doc.at("labeled_ids").get<std::vector<std::string>>();
    s.unlabeled_ids = doc.at("unlabeled_ids").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw DataError("malformed split file " + path.string() + ": " + e.what());
  }
}

std::pair<DatasetManifest, DatasetManifest> carve_validation(const DatasetManifest& manifest, int count,
                                                             std::uint64_t seed) {
  if (count < 0 || static_cast<std::size_t>(count) > manifest.samples.size()) {
    throw ConfigError("validation count " + std::to_string(count) + " exceeds the number of samples");
  }
  std::vector<std::string> ids;
  for (const auto& s : manifest.samples) ids.push_back(s.image_id);
  Rng rng(seed ^ 0x5bd1e995ull);
  rng.shuffle(ids.begin(), ids.end());
  std::vector<std::string> val_ids(ids.begin(), ids.begin() + count);
  std::set<std::string> val_set(val_ids.begin(), val_ids.end());
  std::vector<std::string> train_ids;
  for (const auto& s : manifest.samples) {
    if (!val_set.count(s.image_id)) train_ids.push_back(s.image_id);
  }
  std::sort(val_ids.begin(), val_ids.end());
  return {subset(manifest, train_ids, ManifestRole::kTrain), subset(manifest, val_ids, ManifestRole::kVal)};
}

// ---------------------------------------------------------------------------
// Boundary tracing

namespace {

// Edge directions: 0 = +x, 1 = +y, 2 = -x, 3 = -y (screen coordinates).
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

struct CrackEdge {
  int from = 0;
  int to = 0;
  std::uint8_t dir = 0;
  std::uint8_t border = 0;
};

double point_line_distance(Point p, Point a, Point b) {
  return point_segment_distance(p, {a, b, std::nullopt});
}

void dp_recurse(std::span<const Point> pts, std::size_t lo, std::size_t hi, double eps, std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double best = -1.0;
  std::size_t idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_line_distance(pts[i], pts[lo], pts[hi]);
    if (d > best) {
      best = d;
      idx = i;
    }
  }
  if (best > eps) {
    keep[idx] = 1;
    dp_recurse(pts, lo, idx, eps, keep);
    dp_recurse(pts, idx, hi, eps, keep);
  }
}

void emit_edges(std::span<const Point> simplified, double min_length, std::vector<LineSegment>& out) {
  for (std::size_t i = 0; i + 1 < simplified.size(); ++i) {
    LineSegment seg{simplified[i], simplified[i + 1], std::nullopt};
    if (seg.length() >= min_length) out.push_back(seg);
  }
}

}  // namespace

std::vector<BoundaryLoop> trace_boundaries(const Grid<std::uint8_t>& mask) {
  const int h = mask.height();
  const int w = mask.width();
  auto fg = [&](int y, int x) { return mask.contains(y, x) && mask(y, x) != 0; };
  auto corner = [&](int cx, int cy) { return cy * (w + 1) + cx; };

  std::vector<CrackEdge> edges;
  std::vector<std::array<int, 2>> outgoing(static_cast<std::size_t>(w + 1) * (h + 1), {-1, -1});
  auto add_edge = [&](int x0, int y0, std::uint8_t dir, bool border) {
    const int from = corner(x0, y0);
    const int to = corner(x0 + kDx[dir], y0 + kDy[dir]);
    auto& slot = outgoing[from];
    slot[slot[0] < 0 ? 0 : 1] = static_cast<int>(edges.size());
    edges.push_back({from, to, dir, static_cast<std::uint8_t>(border)});
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!fg(y, x)) continue;
      if (!fg(y - 1, x)) add_edge(x, y, 0, y == 0);
      if (!fg(y, x + 1)) add_edge(x + 1, y, 1, x == w - 1);
      if (!fg(y + 1, x)) add_edge(x + 1, y + 1, 2, y == h - 1);
      if (!fg(y, x - 1)) add_edge(x, y + 1, 3, x == 0);
    }
  }

  std::vector<char> visited(edges.size(), 0);
  std::vector<BoundaryLoop> loops;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (visited[start]) continue;
    BoundaryLoop loop;
    std::vector<std::uint8_t> dirs;
    int cur = static_cast<int>(start);
    while (!visited[cur]) {
      visited[cur] = 1;
      const auto& e = edges[cur];
      loop.points.push_back({static_cast<double>(e.from % (w + 1)), static_cast<double>(e.from / (w + 1))});
      loop.on_border.push_back(e.border);
      dirs.push_back(e.dir);
      // Prefer a right turn, then straight, then left; this keeps diagonally
      // touching pixels in separate loops.
      const auto& slot = outgoing[e.to];
      int next = -1;
      for (int turn : {1, 0, 3}) {
        const int want = (e.dir + turn) % 4;
        for (int candidate : slot) {
          if (candidate >= 0 && edges[candidate].dir == want && !visited[candidate]) {
            next = candidate;
            break;
          }
        }
        if (next >= 0) break;
      }
      if (next < 0) break;
      cur = next;
    }
    // Drop vertices that continue the previous edge in the same direction
    // with the same border flag.
    BoundaryLoop compact;
    const std::size_t n = loop.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = (i + n - 1) % n;
      if (dirs[i] == dirs[prev] && loop.on_border[i] == loop.on_border[prev]) continue;
      compact.points.push_back(loop.points[i]);
      compact.on_border.push_back(loop.on_border[i]);
    }
    if (compact.points.empty()) compact = loop;
    loops.push_back(std::move(compact));
  }
  return loops;
}

std::vector<Point> simplify_polyline(std::span<const Point> points, double epsilon) {
  if (points.size() <= 2) return {points.begin(), points.end()};
  std::vector<char> keep(points.size(), 0);
  keep.front() = keep.back() = 1;
  dp_recurse(points, 0, points.size() - 1, epsilon, keep);
  std::vector<Point> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (keep[i]) out.push_back(points[i]);
  }
  return out;
}

std::vector<LineSegment> extract_lines_from_mask(const Grid<std::uint8_t>& mask, const MaskExtractParams& params) {
  std::vector<LineSegment> out;
  for (const auto& loop : trace_boundaries(mask)) {
    const std::size_t n = loop.points.size();
    if (n < 2) continue;
    const bool any_border = std::any_of(loop.on_border.begin(), loop.on_border.end(), [](auto b) { return b != 0; });
    if (!any_border) {
      // Closed loop: start at the vertex farthest from the centroid, split at
      // the vertex farthest from it, simplify both halves.
      Point centroid;
      for (auto p : loop.points) centroid = centroid + p;
      centroid = centroid * (1.0 / static_cast<double>(n));
      std::size_t s0 = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (distance(loop.points[i], centroid) > distance(loop.points[s0], centroid)) s0 = i;
      }
      std::vector<Point> ring;
      for (std::size_t i = 0; i < n; ++i) ring.push_back(loop.points[(s0 + i) % n]);
      std::size_t k = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (distance(ring[i], ring[0]) > distance(ring[k], ring[0])) k = i;
      }
      std::vector<Point> first(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      std::vector<Point> second(ring.begin() + static_cast<std::ptrdiff_t>(k), ring.end());
      second.push_back(ring[0]);
      emit_edges(simplify_polyline(first, params.epsilon), params.min_length, out);
      emit_edges(simplify_polyline(second, params.epsilon), params.min_length, out);
      continue;
    }
    // Open chains between frame edges.
    std::size_t start = 0;
    while (!loop.on_border[start]) ++start;
    std::vector<Point> chain;
    for (std::size_t step = 1; step <= n; ++step) {
      const std::size_t i = (start + step) % n;
      if (loop.on_border[i]) {
        if (!chain.empty()) {
          chain.push_back(loop.points[i]);
          emit_edges(simplify_polyline(chain, params.epsilon), params.min_length, out);
          chain.clear();
        }
      } else {
        chain.push_back(loop.points[i]);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes

namespace {

Image synth_background(int size, Rng& rng, const SynthParams& p) {
  Image img(3, size, size);
  constexpr int kCoarse = 8;
  for (int c = 0; c < 3; ++c) {
    const double base = rng.uniform(0.05, 0.25);
    std::array<std::array<double, kCoarse + 1>, kCoarse + 1> coarse{};
    for (auto& row : coarse) {
      for (auto& v : row) v = rng.uniform(-0.1, 0.1);
    }
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double gx = (x + 0.5) / size * kCoarse;
        const double gy = (y + 0.5) / size * kCoarse;
        const int ix = std::min(static_cast<int>(gx), kCoarse - 1);
        const int iy = std::min(static_cast<int>(gy), kCoarse - 1);
        const double ax = gx - ix;
        const double ay = gy - iy;
        const double smooth = (coarse[iy][ix] * (1 - ax) + coarse[iy][ix + 1] * ax) * (1 - ay) +
                              (coarse[iy + 1][ix] * (1 - ax) + coarse[iy + 1][ix + 1] * ax) * ay;
        const double v = base + smooth + rng.normal(0.0, 0.03);
        img(c, y, x) = static_cast<float>(std::clamp(v, 0.0, p.background_max));
      }
    }
  }
  return img;
}

void synth_distractors(Image& img, Rng& rng, const SynthParams& p) {
  if (!rng.bernoulli(p.distractor_prob)) return;
  const int count = static_cast<int>(rng.uniform_int(1, std::max(1, p.max_distractors)));
  const int size = img.width();
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, size);
    const double cy = rng.uniform(0.0, size);
    const double radius = rng.uniform(4.0, 14.0);
    const double peak = rng.uniform(0.1, 0.25);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double d2 = (x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy);
        const double v = peak * std::exp(-0.5 * d2 / (radius * radius));
        for (int c = 0; c < 3; ++c) {
          img(c, y, x) = static_cast<float>(std::min(p.background_max, img(c, y, x) + v));
        }
      }
    }
  }
}

std::optional<LineSegment> synth_line(int size, Rng& rng, const SynthParams& p, std::span<const LineSegment> existing) {
  const double diag = std::sqrt(2.0) * size;
  const double margin = 1.0;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double length = rng.uniform(p.min_length_frac, p.max_length_frac) * diag;
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double dx = length * std::cos(theta);
    const double dy = length * std::sin(theta);
    const double x_lo = std::max(margin, margin - dx);
    const double x_hi = std::min(size - margin, size - margin - dx);
    const double y_lo = std::max(margin, margin - dy);
    const double y_hi = std::min(size - margin, size - margin - dy);
    if (x_lo > x_hi || y_lo > y_hi) continue;
    const double sx = rng.uniform(x_lo, x_hi);
    const double sy = rng.uniform(y_lo, y_hi);
    LineSegment seg{{sx, sy}, {sx + dx, sy + dy}, std::nullopt};
    bool separated = true;
    for (const auto& e : existing) {
      if (distance(e.midpoint(), seg.midpoint()) < p.min_center_separation) separated = false;
    }
    if (separated) return seg;
  }
  return std::nullopt;
}

}  // namespace

SynthDataset synth_line_dataset(int n_samples, int image_size, std::uint64_t seed, const SynthParams& p) {
  if (n_samples < 1) throw ConfigError("synth_line_dataset: n_samples must be at least 1");
  if (image_size < 16) throw ConfigError("synth_line_dataset: image_size must be at least 16");
  SynthDataset out;
  out.manifest.name = "synthetic";
  out.manifest.role = ManifestRole::kTrain;
  Rng master(seed);
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = master.fork(static_cast<std::uint64_t>(i));
    Image img = synth_background(image_size, rng, p);
    synth_distractors(img, rng, p);
    const int k = static_cast<int>(rng.uniform_int(p.min_lines, p.max_lines));
    std::vector<LineSegment> lines;
    for (int j = 0; j < k; ++j) {
      if (auto seg = synth_line(image_size, rng, p, lines)) lines.push_back(*seg);
    }
    for (const auto& seg : lines) {
      float rgb[3];
      for (auto& v : rgb) v = static_cast<float>(rng.uniform(0.5, 1.0));
      rgb[rng.uniform_int(0, 2)] = static_cast<float>(rng.uniform(p.line_min, 1.0));
      draw_lines(img, std::span<const LineSegment>(&seg, 1), rgb, p.line_width);
    }
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%05d", i);
    Sample s;
    s.image_id = id;
    s.image_path = std::string("images/") + id + ".ppm";
    s.width = image_size;
    s.height = image_size;
    s.lines = lines;
    out.manifest.samples.push_back(std::move(s));
    out.images.push_back(std::move(img));
  }
  return out;
}

void write_synth_dataset(const SynthDataset& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "images");
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    write_image(out_dir / data.manifest.samples[i].image_path, data.images[i]);
  }
  save_manifest(data.manifest, out_dir / "manifest.json");
}

Grid<std::uint8_t> bright_pixels(const Image& image, float threshold) {
  Grid<std::uint8_t> out(image.height(), image.width(), 0);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float m = std::max({image(0, y, x), image(1, y, x), image(2, y, x)});
      out(y, x) = m > threshold ? 1 : 0;
    }
  }
  return out;
}

}  // namespace sslines
