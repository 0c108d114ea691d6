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

#include <omp.h>

// Small products would otherwise take Eigen's coefficient-based path, whose
// rounding depends on buffer alignment.
#define EIGEN_GEMM_TO_COEFFBASED_THRESHOLD 0
#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "sslines/kernels.hpp"

namespace sslines::kernels {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMatrix>;
using ConstMapRM = Eigen::Map<const RowMatrix>;

// Rows are (c, ky, kx), columns are output positions.
void im2col(const ConvShape& s, const float* in, float* cols) {
  const int oh = s.out_h();
  const int ow = s.out_w();
  const int k = s.kernel;
  const int rows = s.in_c * k * k;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int c = r / (k * k);
    const int ky = (r / k) % k;
    const int kx = r % k;
    float* dst = cols + static_cast<long long>(r) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      const int iy = y * s.stride - s.pad + ky;
      if (iy < 0 || iy >= s.in_h) {
        std::fill(dst + y * ow, dst + (y + 1) * ow, 0.0f);
        continue;
      }
      const float* src = in + (c * s.in_h + iy) * s.in_w;
      for (int x = 0; x < ow; ++x) {
        const int ix = x * s.stride - s.pad + kx;
        dst[y * ow + x] = (ix >= 0 && ix < s.in_w) ? src[ix] : 0.0f;
      }
    }
  }
}

// Each input channel is owned by one thread, so the scatter is race free and
// the summation order does not depend on the thread count.
void col2im(const ConvShape& s, const float* cols, float* out) {
  const int oh = s.out_h();
  const int ow = s.out_w();
  const int k = s.kernel;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < s.in_c; ++c) {
    float* plane = out + static_cast<long long>(c) * s.in_h * s.in_w;
    std::fill(plane, plane + s.in_h * s.in_w, 0.0f);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* src = cols + static_cast<long long>((c * k + ky) * k + kx) * oh * ow;
        for (int y = 0; y < oh; ++y) {
          const int iy = y * s.stride - s.pad + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int x = 0; x < ow; ++x) {
            const int ix = x * s.stride - s.pad + kx;
            if (ix >= 0 && ix < s.in_w) plane[iy * s.in_w + ix] += src[y * ow + x];
          }
        }
      }
    }
  }
}

std::vector<float>& workspace(std::size_t n) {
  thread_local std::vector<float> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

bool is_pointwise(const ConvShape& s) { return s.kernel == 1 && s.stride == 1 && s.pad == 0; }

}  // namespace

void set_num_threads(int n) {
  omp_set_num_threads(std::max(1, n));
  Eigen::setNbThreads(std::max(1, n));
}

int num_threads() { return omp_get_max_threads(); }

void conv2d_forward(const ConvShape& s, const float* in, const float* w, const float* b, float* out) {
  const int n = s.out_h() * s.out_w();
  const int kdim = s.in_c * s.kernel * s.kernel;
  const float* cols = in;
  if (!is_pointwise(s)) {
    auto& buf = workspace(static_cast<std::size_t>(kdim) * n);
    im2col(s, in, buf.data());
    cols = buf.data();
  }
  MapRM y(out, s.out_c, n);
  y.noalias() = ConstMapRM(w, s.out_c, kdim) * ConstMapRM(cols, kdim, n);
  if (b) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < s.out_c; ++o) y.row(o).array() += b[o];
  }
}

void conv2d_backward(const ConvShape& s, const float* in, const float* w, const float* grad_out, float* grad_in,
                     float* grad_w, float* grad_b) {
  const int n = s.out_h() * s.out_w();
  const int kdim = s.in_c * s.kernel * s.kernel;
  const bool pointwise = is_pointwise(s);
  std::vector<float>& buf = workspace(pointwise ? 0 : static_cast<std::size_t>(kdim) * n);
  const float* cols = in;
  if (!pointwise) {
    im2col(s, in, buf.data());
    cols = buf.data();
  }
  ConstMapRM g(grad_out, s.out_c, n);
  MapRM(grad_w, s.out_c, kdim).noalias() += g * ConstMapRM(cols, kdim, n).transpose();
  if (grad_b) {
    for (int o = 0; o < s.out_c; ++o) {
      const float* row = grad_out + static_cast<long long>(o) * n;
      float acc = 0.0f;
      for (int i = 0; i < n; ++i) acc += row[i];
      grad_b[o] += acc;
    }
  }
  if (!grad_in) return;
  if (pointwise) {
    MapRM(grad_in, s.in_c, n).noalias() = ConstMapRM(w, s.out_c, kdim).transpose() * g;
    return;
  }
  // Reuse the column buffer for the input-side gradient.
  MapRM(buf.data(), kdim, n).noalias() = ConstMapRM(w, s.out_c, kdim).transpose() * g;
  col2im(s, buf.data(), grad_in);
}

}  // namespace sslines::kernels
