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

#ifndef SSLINES_DATA_HPP_
#define SSLINES_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sslines/geometry.hpp"
#include "sslines/rng.hpp"

namespace sslines {

class ManifestNotFoundError : public DataError {
 public:
  using DataError::DataError;
};

class ManifestFormatError : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateIdError : public DataError {
 public:
  using DataError::DataError;
};

struct Sample {
  std::string image_id;
  std::string image_path;
  int width = 0;
  int height = 0;
  std::optional<std::vector<LineSegment>> lines;  // nullopt: unlabeled

  bool labeled() const { return lines.has_value(); }
};

enum class ManifestRole : std::uint8_t { kTrain, kVal, kTest };

std::string to_string(ManifestRole role);
ManifestRole parse_role(const std::string& s);

struct DatasetManifest {
  std::string name;
  ManifestRole role = ManifestRole::kTrain;
  std::vector<Sample> samples;
  std::filesystem::path base_dir;  // relative image paths resolve against this; not serialized

  std::filesystem::path resolve(const Sample& s) const;
  const Sample* find(const std::string& image_id) const;
};

struct ManifestLoadReport {
  int dropped_lines = 0;  // non-finite, degenerate, or entirely outside the image
  int clipped_lines = 0;  // partially outside, clipped to the image
};

struct LoadedManifest {
  DatasetManifest manifest;
  ManifestLoadReport report;
};

LoadedManifest load_manifest(const std::filesystem::path& path);
LoadedManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});
std::string serialize_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Manifest restricted to the given ids, in the given order.
DatasetManifest subset(const DatasetManifest& manifest, std::span<const std::string> ids, ManifestRole role);
/// Copy with every sample's lines removed.
DatasetManifest strip_labels(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Splits

/// One of 1/16, 1/8, 1/4, 1/2, 1.
struct SplitFraction {
  int denominator = 1;

  double value() const { return 1.0 / denominator; }
  std::string str() const { return denominator == 1 ? "1" : "1/" + std::to_string(denominator); }
};

SplitFraction parse_fraction(const std::string& s);
SplitFraction fraction_from_value(double v);

struct SplitSpec {
  SplitFraction fraction;
  std::uint64_t seed = 0;
  std::vector<std::string> labeled_ids;
  std::vector<std::string> unlabeled_ids;
};

SplitSpec make_split(const DatasetManifest& manifest, SplitFraction fraction, std::uint64_t seed);
std::string serialize_split(const SplitSpec& split);
SplitSpec load_split(const std::filesystem::path& path);

/// Deterministically move `count` samples into a validation manifest.
std::pair<DatasetManifest, DatasetManifest> carve_validation(const DatasetManifest& manifest, int count,
                                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Silhouette lines from segmentation masks

struct MaskExtractParams {
  double epsilon = 2.0;      // polyline simplification tolerance, pixels
  double min_length = 10.0;  // shortest emitted edge, pixels
};

struct Polyline {
  std::vector<Point> points;
  bool closed = false;
};

/// Closed crack-following boundary loops of the foreground (4-connected),
/// vertices at pixel corners, clockwise on screen. `on_border[i]` flags the
/// edge points[i] -> points[i+1] as lying on the image frame.
struct BoundaryLoop {
  std::vector<Point> points;
  std::vector<std::uint8_t> on_border;
};

std::vector<BoundaryLoop> trace_boundaries(const Grid<std::uint8_t>& mask);

/// Douglas-Peucker simplification of an open polyline (endpoints kept).
std::vector<Point> simplify_polyline(std::span<const Point> points, double epsilon);

std::vector<LineSegment> extract_lines_from_mask(const Grid<std::uint8_t>& mask, const MaskExtractParams& params = {});

// ---------------------------------------------------------------------------
// Synthetic scenes

struct SynthParams {
  int min_lines = 2;
  int max_lines = 8;
  double min_length_frac = 0.2;  // of the image diagonal
  double max_length_frac = 0.8;
  double line_width = 2.0;
  double min_center_separation = 8.0;  // pixels between line midpoints
  double distractor_prob = 0.5;
  int max_distractors = 3;
  double background_max = 0.45;  // brightest background value
  double line_min = 0.8;         // dimmest line channel maximum
};

struct SynthDataset {
  DatasetManifest manifest;
  std::vector<Image> images;
};

SynthDataset synth_line_dataset(int n_samples, int image_size, std::uint64_t seed, const SynthParams& params = {});

/// Writes images/<id>.ppm and manifest.json under `out_dir`.
void write_synth_dataset(const SynthDataset& data, const std::filesystem::path& out_dir);

/// Pixels whose maximum channel exceeds `threshold`.
Grid<std::uint8_t> bright_pixels(const Image& image, float threshold);

}  // namespace sslines

#endif  // SSLINES_DATA_HPP_
