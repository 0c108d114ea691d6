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

#ifndef SSLINES_AUGMENT_HPP_
#define SSLINES_AUGMENT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sslines/geometry.hpp"
#include "sslines/rng.hpp"
#include "sslines/tensor.hpp"

namespace sslines {

// ---------------------------------------------------------------------------
// Labeled stream

struct LabeledAugParams {
  double flip_prob = 0.5;
  bool rotate = true;  // uniform quarter-turn count in {0, 1, 2, 3}
  double hue_shift = 0.05;         // max |shift| as a fraction of the hue circle
  double saturation_shift = 0.2;   // max |additive shift|
  double value_shift = 0.1;        // max |additive shift|
  double brightness_shift = 0.1;   // max |additive shift|
  double min_line_length = 2.0;
};

/// One concrete draw of the labeled augmentation.
struct LabeledAugDraw {
  bool hflip = false;
  int rotations = 0;
  double hue = 0.0;
  double saturation = 0.0;
  double value = 0.0;
  double brightness = 0.0;
};

LabeledAugDraw draw_labeled_aug(Rng& rng, const LabeledAugParams& params);
TransformedSample apply_labeled_aug(const LabeledAugDraw& draw, const Image& image,
                                    std::span<const LineSegment> lines, double min_line_length = 2.0);
TransformedSample labeled_augment(const Image& image, std::span<const LineSegment> lines, Rng& rng,
                                  const LabeledAugParams& params = {});

// ---------------------------------------------------------------------------
// Photometric primitives

/// Additive shifts in HSV space followed by a brightness offset.
void hsv_shift(Image& image, double hue, double saturation, double value);
void adjust_brightness_additive(Image& image, double delta);

void to_grayscale(Image& image);
/// Separable Gaussian blur, kernel radius ceil(3 sigma), edge clamped.
void gaussian_blur(Image& image, double sigma);

struct ColorJitter {
  double brightness = 1.0;  // multiplicative factors, 1 = identity
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;  // fraction of the hue circle
};
void apply_color_jitter(Image& image, const ColorJitter& jitter);

// ---------------------------------------------------------------------------
// Unlabeled stream

struct UnlabeledAugParams {
  double flip_prob = 0.5;
  double crop_scale_min = 0.8;  // crop area fraction
  double crop_scale_max = 1.0;
  double jitter_prob = 0.8;
  double jitter_brightness = 0.5;
  double jitter_contrast = 0.5;
  double jitter_saturation = 0.5;
  double jitter_hue = 0.25;
  double grayscale_prob = 0.2;
  double blur_prob = 0.5;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;
};

struct UnlabeledTriple {
  Image weak;
  Image strong1;
  Image strong2;
  std::vector<GeomTransform> geom;  // shared weak perturbation, in application order
};

UnlabeledTriple make_unlabeled_triple(const Image& image, Rng& rng, const UnlabeledAugParams& params = {});

/// Independent photometric draw for one strong view.
Image strong_perturbation(const Image& weak, Rng& rng, const UnlabeledAugParams& params);

// ---------------------------------------------------------------------------
// CutMix

enum class CutMixMode : std::uint8_t { kOff, kAxis, kSquare };

enum class MixKind : std::uint8_t { kNone, kAxisX, kAxisY, kBox };

/**
 * Which pixels of a mixed view come from the partner sample. Geometry is in
 * input pixels and always lies on the output grid (multiples of `stride`),
 * so the same mask applies exactly at map scale.
 *
 *   kAxisX: columns [cut, W) from the partner
 *   kAxisY: rows    [cut, H) from the partner
 *   kBox:   [x0, x1) x [y0, y1) from the partner
 */
struct MixMask {
  MixKind kind = MixKind::kNone;
  int cut = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int partner = -1;
  int stride = 4;

  bool from_partner(int x, int y, int scale) const;
  /// Cut position divided down to a map with the given downsample factor.
  int map_cut(int scale) const { return cut / scale; }
};

struct CutMixParams {
  double axis_cut_min = 0.25;
  double axis_cut_max = 0.75;
  double box_area_min = 0.02;
  double box_area_max = 0.4;
  double box_ratio_min = 0.3;
  double box_ratio_max = 1.0 / 0.3;
  int stride = 4;
};

MixMask draw_axis_mask(int width, int height, Rng& rng, const CutMixParams& params = {});
MixMask draw_square_mask(int width, int height, Rng& rng, const CutMixParams& params = {});

/// Mix pixels of a (or maps) with b according to `mask` at the given scale
/// (1 for input images, stride for output maps).
template <class T>
Tensor3<T> mix_tensors(const Tensor3<T>& a, const Tensor3<T>& b, const MixMask& mask, int scale);

Tensor3<double> mix_maps(const Tensor3<double>& a, const Tensor3<double>& b, const MixMask& mask);

struct CutMixResult {
  std::vector<Image> strong1;
  std::vector<Image> strong2;
  std::vector<MixMask> masks;
};

/// Pairs sample i with sample (i + 1) mod B and mixes the strong views of each
/// sample with its partner's. Batch size 1 is a no-op with empty masks.
CutMixResult cutmix_batch(std::span<const UnlabeledTriple> batch, Rng& rng, CutMixMode mode,
                          const CutMixParams& params = {});

inline CutMixResult cutmix_axis(std::span<const UnlabeledTriple> batch, Rng& rng,
                                const CutMixParams& params = {}) {
  return cutmix_batch(batch, rng, CutMixMode::kAxis, params);
}

}  // namespace sslines

#endif  // SSLINES_AUGMENT_HPP_
