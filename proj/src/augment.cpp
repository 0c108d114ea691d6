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

#include "sslines/augment.hpp"

#include <algorithm>
#include <cmath>

namespace sslines {
namespace {

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = mx > 0.0f ? d / mx : 0.0f;
  if (d <= 0.0f) {
    h = 0.0f;
    return;
  }
  if (mx == r) {
    h = (g - b) / d;
  } else if (mx == g) {
    h = 2.0f + (b - r) / d;
  } else {
    h = 4.0f + (r - g) / d;
  }
  h /= 6.0f;
  if (h < 0.0f) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  h = h - std::floor(h);
  const float hh = h * 6.0f;
  const int sector = std::min(static_cast<int>(hh), 5);
  const float f = hh - sector;
  const float p = v * (1.0f - s);
  const float q = v * (1.0f - s * f);
  const float t = v * (1.0f - s * (1.0f - f));
  switch (sector) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
}

float luminance(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

void clamp01(Image& image) {
  for (auto& v : image.values()) v = std::clamp(v, 0.0f, 1.0f);
}

double jitter_factor(Rng& rng, double amount) { return rng.uniform(std::max(0.0, 1.0 - amount), 1.0 + amount); }

}  // namespace

// ---------------------------------------------------------------------------

void hsv_shift(Image& image, double hue, double saturation, double value) {
  const int h = image.height();
  const int w = image.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float hh, ss, vv;
      rgb_to_hsv(image(0, y, x), image(1, y, x), image(2, y, x), hh, ss, vv);
      hh += static_cast<float>(hue);
      ss = std::clamp(ss + static_cast<float>(saturation), 0.0f, 1.0f);
      vv = std::clamp(vv + static_cast<float>(value), 0.0f, 1.0f);
      hsv_to_rgb(hh, ss, vv, image(0, y, x), image(1, y, x), image(2, y, x));
    }
  }
}

void adjust_brightness_additive(Image& image, double delta) {
  for (auto& v : image.values()) v = std::clamp(v + static_cast<float>(delta), 0.0f, 1.0f);
}

void to_grayscale(Image& image) {
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float l = luminance(image(0, y, x), image(1, y, x), image(2, y, x));
      image(0, y, x) = image(1, y, x) = image(2, y, x) = l;
    }
  }
}

void gaussian_blur(Image& image, double sigma) {
  if (!(sigma > 0.0)) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k = static_cast<float>(k / sum);

  const int h = image.height();
  const int w = image.width();
  std::vector<float> tmp(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < image.channels(); ++c) {
    auto plane = image.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * plane[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
        }
        tmp[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
        }
        plane[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
  }
}

void apply_color_jitter(Image& image, const ColorJitter& jitter) {
  if (jitter.brightness != 1.0) {
    for (auto& v : image.values()) v *= static_cast<float>(jitter.brightness);
    clamp01(image);
  }
  if (jitter.contrast != 1.0) {
    double mean = 0.0;
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) mean += luminance(image(0, y, x), image(1, y, x), image(2, y, x));
    }
    mean /= static_cast<double>(image.plane_size());
    for (auto& v : image.values()) v = static_cast<float>((v - mean) * jitter.contrast + mean);
    clamp01(image);
  }
  if (jitter.saturation != 1.0) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const float l = luminance(image(0, y, x), image(1, y, x), image(2, y, x));
        for (int c = 0; c < 3; ++c) {
          image(c, y, x) = static_cast<float>(l + (image(c, y, x) - l) * jitter.saturation);
        }
      }
    }
    clamp01(image);
  }
  if (jitter.hue != 0.0) hsv_shift(image, jitter.hue, 0.0, 0.0);
}

// ---------------------------------------------------------------------------

LabeledAugDraw draw_labeled_aug(Rng& rng, const LabeledAugParams& p) {
  LabeledAugDraw d;
  d.hflip = rng.bernoulli(p.flip_prob);
  d.rotations = p.rotate ? static_cast<int>(rng.uniform_int(0, 3)) : 0;
  d.hue = rng.uniform(-p.hue_shift, p.hue_shift);
  d.saturation = rng.uniform(-p.saturation_shift, p.saturation_shift);
  d.value = rng.uniform(-p.value_shift, p.value_shift);
  d.brightness = rng.uniform(-p.brightness_shift, p.brightness_shift);
  return d;
}

TransformedSample apply_labeled_aug(const LabeledAugDraw& draw, const Image& image,
                                    std::span<const LineSegment> lines, double min_line_length) {
  TransformedSample out{image, {lines.begin(), lines.end()}};
  if (draw.hflip) {
    out = apply_transform(GeomTransform::hflip(image.width(), image.height()), out.image, out.lines,
                          min_line_length);
  }
  if (draw.rotations % 4 != 0) {
    out = apply_transform(GeomTransform::rot90(draw.rotations, out.image.width(), out.image.height()), out.image,
                          out.lines, min_line_length);
  }
  if (draw.hue != 0.0 || draw.saturation != 0.0 || draw.value != 0.0) {
    hsv_shift(out.image, draw.hue, draw.saturation, draw.value);
  }
  if (draw.brightness != 0.0) adjust_brightness_additive(out.image, draw.brightness);
  return out;
}

TransformedSample labeled_augment(const Image& image, std::span<const LineSegment> lines, Rng& rng,
                                  const LabeledAugParams& params) {
  return apply_labeled_aug(draw_labeled_aug(rng, params), image, lines, params.min_line_length);
}

// ---------------------------------------------------------------------------

Image strong_perturbation(const Image& weak, Rng& rng, const UnlabeledAugParams& p) {
  Image out = weak;
  // Every draw is taken unconditionally so the rng advances identically
  // regardless of which perturbations fire.
  const bool jitter = rng.bernoulli(p.jitter_prob);
  ColorJitter cj;
  cj.brightness = jitter_factor(rng, p.jitter_brightness);
  cj.contrast = jitter_factor(rng, p.jitter_contrast);
  cj.saturation = jitter_factor(rng, p.jitter_saturation);
  cj.hue = rng.uniform(-p.jitter_hue, p.jitter_hue);
  const bool gray = rng.bernoulli(p.grayscale_prob);
  const bool blur = rng.bernoulli(p.blur_prob);
  const double sigma = rng.uniform(p.blur_sigma_min, p.blur_sigma_max);
  if (jitter) apply_color_jitter(out, cj);
  if (gray) to_grayscale(out);
  if (blur) gaussian_blur(out, sigma);
  return out;
}

UnlabeledTriple make_unlabeled_triple(const Image& image, Rng& rng, const UnlabeledAugParams& p) {
  UnlabeledTriple t;
  const int w = image.width();
  const int h = image.height();
  Image weak = image;
  if (rng.bernoulli(p.flip_prob)) {
    t.geom.push_back(GeomTransform::hflip(w, h));
    weak = transform_image(t.geom.back(), weak);
  }
  const double scale = rng.uniform(p.crop_scale_min, p.crop_scale_max);
  const double side = std::sqrt(std::clamp(scale, 0.0, 1.0));
  const double cw = w * side;
  const double ch = h * side;
  const double x0 = rng.uniform(0.0, w - cw);
  const double y0 = rng.uniform(0.0, h - ch);
  if (side < 1.0) {
    t.geom.push_back(GeomTransform::crop_resize({x0, y0, x0 + cw, y0 + ch}, w, h, w, h));
    weak = transform_image(t.geom.back(), weak);
  }
  t.strong1 = strong_perturbation(weak, rng, p);
  t.strong2 = strong_perturbation(weak, rng, p);
  t.weak = std::move(weak);
  return t;
}

// ---------------------------------------------------------------------------

bool MixMask::from_partner(int x, int y, int scale) const {
  const int px = x * scale;
  const int py = y * scale;
  switch (kind) {
    case MixKind::kAxisX:
      return px >= cut;
    case MixKind::kAxisY:
      return py >= cut;
    case MixKind::kBox:
      return px >= x0 && px < x1 && py >= y0 && py < y1;
    case MixKind::kNone:
      break;
  }
  return false;
}

MixMask draw_axis_mask(int width, int height, Rng& rng, const CutMixParams& p) {
  MixMask m;
  m.stride = p.stride;
  const bool x_axis = rng.bernoulli(0.5);
  m.kind = x_axis ? MixKind::kAxisX : MixKind::kAxisY;
  const int cells = (x_axis ? width : height) / p.stride;
  const auto lo = static_cast<std::int64_t>(std::ceil(p.axis_cut_min * cells));
  const auto hi = std::max(lo, static_cast<std::int64_t>(std::floor(p.axis_cut_max * cells)));
  m.cut = static_cast<int>(rng.uniform_int(lo, hi)) * p.stride;
  return m;
}

MixMask draw_square_mask(int width, int height, Rng& rng, const CutMixParams& p) {
  MixMask m;
  m.stride = p.stride;
  m.kind = MixKind::kBox;
  const double area = rng.uniform(p.box_area_min, p.box_area_max) * width * height;
  const double ratio = rng.uniform(p.box_ratio_min, p.box_ratio_max);
  const int cells_w = width / p.stride;
  const int cells_h = height / p.stride;
  const int bw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * ratio) / p.stride)), 1, cells_w);
  const int bh = std::clamp(static_cast<int>(std::lround(std::sqrt(area / ratio) / p.stride)), 1, cells_h);
  const int cx = static_cast<int>(rng.uniform_int(0, cells_w - bw));
  const int cy = static_cast<int>(rng.uniform_int(0, cells_h - bh));
  m.x0 = cx * p.stride;
  m.y0 = cy * p.stride;
  m.x1 = (cx + bw) * p.stride;
  m.y1 = (cy + bh) * p.stride;
  return m;
}

template <class T>
Tensor3<T> mix_tensors(const Tensor3<T>& a, const Tensor3<T>& b, const MixMask& mask, int scale) {
  require_same_shape(a, b, "mix");
  Tensor3<T> out = a;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        if (mask.from_partner(x, y, scale)) out(c, y, x) = b(c, y, x);
      }
    }
  }
  return out;
}

template Tensor3<float> mix_tensors(const Tensor3<float>&, const Tensor3<float>&, const MixMask&, int);
template Tensor3<double> mix_tensors(const Tensor3<double>&, const Tensor3<double>&, const MixMask&, int);

Tensor3<double> mix_maps(const Tensor3<double>& a, const Tensor3<double>& b, const MixMask& mask) {
  return mix_tensors(a, b, mask, mask.stride);
}

CutMixResult cutmix_batch(std::span<const UnlabeledTriple> batch, Rng& rng, CutMixMode mode,
                          const CutMixParams& params) {
  CutMixResult out;
  const auto n = batch.size();
  for (const auto& t : batch) {
    out.strong1.push_back(t.strong1);
    out.strong2.push_back(t.strong2);
  }
  if (n < 2 || mode == CutMixMode::kOff) {
    out.masks.assign(n, MixMask{});
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const int w = batch[i].strong1.width();
    const int h = batch[i].strong1.height();
    MixMask m = mode == CutMixMode::kAxis ? draw_axis_mask(w, h, rng, params) : draw_square_mask(w, h, rng, params);
    m.partner = static_cast<int>(j);
    out.strong1[i] = mix_tensors(batch[i].strong1, batch[j].strong1, m, 1);
    out.strong2[i] = mix_tensors(batch[i].strong2, batch[j].strong2, m, 1);
    out.masks.push_back(m);
  }
  return out;
}

}  // namespace sslines
