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

#include "sslines/kernels.hpp"

namespace sslines::reference {

void conv2d_forward(const ConvShape& s, const float* in, const float* w, const float* b, float* out) {
  const int oh = s.out_h();
  const int ow = s.out_w();
  const int k = s.kernel;
  for (int o = 0; o < s.out_c; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = b ? b[o] : 0.0;
        for (int c = 0; c < s.in_c; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x * s.stride - s.pad + kx;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += static_cast<double>(w[((o * s.in_c + c) * k + ky) * k + kx]) *
                     in[(c * s.in_h + iy) * s.in_w + ix];
            }
          }
        }
        out[(o * oh + y) * ow + x] = static_cast<float>(acc);
      }
    }
  }
}

void conv2d_backward(const ConvShape& s, const float* in, const float* w, const float* grad_out, float* grad_in,
                     float* grad_w, float* grad_b) {
  const int oh = s.out_h();
  const int ow = s.out_w();
  const int k = s.kernel;
  if (grad_in) std::fill(grad_in, grad_in + s.in_c * s.in_h * s.in_w, 0.0f);
  for (int o = 0; o < s.out_c; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const float g = grad_out[(o * oh + y) * ow + x];
        if (grad_b) grad_b[o] += g;
        for (int c = 0; c < s.in_c; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x * s.stride - s.pad + kx;
              if (ix < 0 || ix >= s.in_w) continue;
              const int wi = ((o * s.in_c + c) * k + ky) * k + kx;
              const int ii = (c * s.in_h + iy) * s.in_w + ix;
              grad_w[wi] += g * in[ii];
              if (grad_in) grad_in[ii] += g * w[wi];
            }
          }
        }
      }
    }
  }
}

}  // namespace sslines::reference
