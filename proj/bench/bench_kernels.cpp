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

// Parallel im2col/GEMM kernels against the serial reference loops on layer
// shapes taken from the desk model.

#include <benchmark/benchmark.h>

#include <vector>

#include "sslines/kernels.hpp"
#include "sslines/model.hpp"
#include "sslines/rng.hpp"

namespace {

using sslines::ConvShape;

// {in_c, size, out_c, kernel, stride}
const int kShapes[][5] = {
    {3, 128, 16, 3, 2},   // stem
    {32, 32, 48, 3, 1},   // mid encoder
    {96, 8, 96, 3, 1},    // deep encoder
    {32, 32, 16, 1, 1},   // head output
};

struct Buffers {
  ConvShape s;
  std::vector<float> in, w, b, out, gin, gw, gb;

  explicit Buffers(int index) {
    const auto* p = kShapes[index];
    s.in_c = p[0];
    s.in_h = s.in_w = p[1];
    s.out_c = p[2];
    s.kernel = p[3];
    s.stride = p[4];
    s.pad = s.kernel / 2;
    sslines::Rng rng(index);
    auto fill = [&](std::vector<float>& v, std::size_t n) {
      v.resize(n);
      for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    };
    fill(in, static_cast<std::size_t>(s.in_c) * s.in_h * s.in_w);
    fill(w, static_cast<std::size_t>(s.out_c) * s.in_c * s.kernel * s.kernel);
    fill(b, s.out_c);
    fill(out, static_cast<std::size_t>(s.out_c) * s.out_h() * s.out_w());
    gin.resize(in.size());
    gw.resize(w.size());
    gb.resize(b.size());
  }
};

void label(benchmark::State& state, const ConvShape& s) {
  state.counters["MACs"] = benchmark::Counter(static_cast<double>(s.macs()) * state.iterations(),
                                              benchmark::Counter::kIsRate);
}

void BM_ForwardParallel(benchmark::State& state) {
  Buffers d(static_cast<int>(state.range(0)));
  sslines::kernels::set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    sslines::kernels::conv2d_forward(d.s, d.in.data(), d.w.data(), d.b.data(), d.out.data());
    benchmark::DoNotOptimize(d.out.data());
  }
  label(state, d.s);
}

void BM_ForwardReference(benchmark::State& state) {
  Buffers d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    sslines::reference::conv2d_forward(d.s, d.in.data(), d.w.data(), d.b.data(), d.out.data());
    benchmark::DoNotOptimize(d.out.data());
  }
  label(state, d.s);
}

void BM_BackwardParallel(benchmark::State& state) {
  Buffers d(static_cast<int>(state.range(0)));
  sslines::kernels::set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    sslines::kernels::conv2d_backward(d.s, d.in.data(), d.w.data(), d.out.data(), d.gin.data(), d.gw.data(),
                                      d.gb.data());
    benchmark::DoNotOptimize(d.gw.data());
  }
  label(state, d.s);
}

void BM_BackwardReference(benchmark::State& state) {
  Buffers d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    sslines::reference::conv2d_backward(d.s, d.in.data(), d.w.data(), d.out.data(), d.gin.data(), d.gw.data(),
                                        d.gb.data());
    benchmark::DoNotOptimize(d.gw.data());
  }
  label(state, d.s);
}

void BM_DeskModelForward(benchmark::State& state) {
  sslines::kernels::set_num_threads(static_cast<int>(state.range(0)));
  const sslines::LineModel model(sslines::ModelConfig::desk(), 0);
  sslines::Image image(3, 128, 128);
  for (auto& v : image.values()) v = 0.5f;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(image));
  state.counters["MACs"] =
      benchmark::Counter(static_cast<double>(model.forward_macs()) * state.iterations(), benchmark::Counter::kIsRate);
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (int shape = 0; shape < 4; ++shape) {
    for (int threads : {1, 2, 4}) b->Args({shape, threads});
  }
}

}  // namespace

BENCHMARK(BM_ForwardParallel)->Apply(thread_args);
BENCHMARK(BM_ForwardReference)->DenseRange(0, 3);
BENCHMARK(BM_BackwardParallel)->Apply(thread_args);
BENCHMARK(BM_BackwardReference)->DenseRange(0, 3);
BENCHMARK(BM_DeskModelForward)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
