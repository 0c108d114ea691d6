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

#ifndef SSLINES_IMAGE_HPP_
#define SSLINES_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>

#include "sslines/geometry.hpp"

namespace sslines {

// Images are 3 x H x W float tensors with values in [0, 1]. On disk we use
// binary netpbm: P6 (RGB) for images and P5 (gray) for masks.

Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

Grid<std::uint8_t> read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Grid<std::uint8_t>& mask);

/// Bilinear resize with pixel-center alignment.
Image resize_image(const Image& image, int out_width, int out_height);

/// Draw anti-aliasing-free lines of the given width for overlays.
void draw_lines(Image& image, std::span<const LineSegment> lines, std::span<const float> rgb, double width = 1.5);

}  // namespace sslines

#endif  // SSLINES_IMAGE_HPP_
