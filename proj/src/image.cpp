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

#include "sslines/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace sslines {
namespace {

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

void skip_ws_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

NetpbmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  NetpbmHeader h;
  in >> h.magic;
  skip_ws_and_comments(in);
  in >> h.width;
  skip_ws_and_comments(in);
  in >> h.height;
  skip_ws_and_comments(in);
  in >> h.maxval;
  in.get();
  if (!in || h.width <= 0 || h.height <= 0 || h.maxval != 255) {
    throw DataError("unsupported or malformed netpbm file: " + path.string());
  }
  return h;
}

std::uint8_t to_byte(float v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image: " + path.string());
  const auto h = read_header(in, path);
  const int channels = h.magic == "P6" ? 3 : (h.magic == "P5" ? 1 : 0);
  if (channels == 0) throw DataError("expected P5 or P6 image: " + path.string());
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(h.width) * h.height * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError("truncated image: " + path.string());
  Image img(3, h.height, h.width);
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * h.width + x) * channels;
      for (int c = 0; c < 3; ++c) img(c, y, x) = raw[base + (channels == 3 ? c : 0)] / 255.0f;
    }
  }
  return img;
}

void write_image(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(image.width()) * image.height() * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * image.width() + x) * 3;
      for (int c = 0; c < 3; ++c) raw[base + c] = to_byte(image(c, y, x));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Grid<std::uint8_t> read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mask: " + path.string());
  const auto h = read_header(in, path);
  if (h.magic != "P5") throw DataError("expected P5 mask: " + path.string());
  Grid<std::uint8_t> mask(h.height, h.width);
  std::vector<std::uint8_t> raw(mask.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError("truncated mask: " + path.string());
  for (std::size_t i = 0; i < raw.size(); ++i) mask.values()[i] = raw[i] > 127 ? 1 : 0;
  return mask;
}

void write_mask(const std::filesystem::path& path, const Grid<std::uint8_t>& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write mask: " + path.string());
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (auto v : mask.values()) out.put(static_cast<char>(v ? 255 : 0));
}

Image resize_image(const Image& image, int out_width, int out_height) {
  if (image.width() == out_width && image.height() == out_height) return image;
  const auto t = GeomTransform::crop_resize({0.0, 0.0, static_cast<double>(image.width()),
                                             static_cast<double>(image.height())},
                                            image.width(), image.height(), out_width, out_height);
  return transform_image(t, image);
}

void draw_lines(Image& image, std::span<const LineSegment> lines, std::span<const float> rgb, double width) {
  const double half = width * 0.5;
  for (const auto& seg : lines) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(seg.start.x, seg.end.x) - half - 1)));
    const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(std::max(seg.start.x, seg.end.x) + half)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(seg.start.y, seg.end.y) - half - 1)));
    const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(std::max(seg.start.y, seg.end.y) + half)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (point_segment_distance({x + 0.5, y + 0.5}, seg) <= half) {
          for (int c = 0; c < 3 && c < static_cast<int>(rgb.size()); ++c) image(c, y, x) = rgb[c];
        }
      }
    }
  }
}

}  // namespace sslines
