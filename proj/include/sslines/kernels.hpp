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

#ifndef SSLINES_KERNELS_HPP_
#define SSLINES_KERNELS_HPP_

namespace sslines {

/// Square-kernel 2-D convolution geometry for one CHW sample.
struct ConvShape {
  int in_c = 0;
  int in_h = 0;
  int in_w = 0;
  int out_c = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  long long macs() const { return 1LL * out_c * out_h() * out_w() * in_c * kernel * kernel; }
};

// Weights are laid out [out_c][in_c][kernel][kernel]; tensors are CHW.
//
// conv2d_backward overwrites grad_in (when non-null) and accumulates into
// grad_w and grad_b.

namespace kernels {

/// im2col + GEMM, OpenMP parallel.
void conv2d_forward(const ConvShape& s, const float* in, const float* w, const float* b, float* out);
void conv2d_backward(const ConvShape& s, const float* in, const float* w, const float* grad_out, float* grad_in,
                     float* grad_w, float* grad_b);

/// Number of OpenMP threads used by the parallel kernels. 1 gives the strict
/// single-threaded mode.
void set_num_threads(int n);
int num_threads();

}  // namespace kernels

namespace reference {

/// Direct loops, serial. Kept as the correctness baseline.
void conv2d_forward(const ConvShape& s, const float* in, const float* w, const float* b, float* out);
void conv2d_backward(const ConvShape& s, const float* in, const float* w, const float* grad_out, float* grad_in,
                     float* grad_w, float* grad_b);

}  // namespace reference

}  // namespace sslines

#endif  // SSLINES_KERNELS_HPP_
