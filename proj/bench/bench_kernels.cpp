// Copyright 2026 The PRSNet-Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel im2col+GEMM kernels against the serial reference loops, at
// representative convolution shapes. Thread count is the second argument
// of the parallel benchmarks.

#include <benchmark/benchmark.h>

#include <vector>

#include "prs/kernels.hpp"
#include "prs/random.hpp"

namespace {

using namespace prs;
namespace k = prs::kernels;

struct Shape {
  const char* name;
  k::ConvGeometry g;
};

// batch, in_c, h, w, out_c, kernel, stride, padding
const Shape kShapes[] = {
    {"stem0", {8, 1, 64, 64, 8, 3, 1, 1}},
    {"stage0", {8, 16, 32, 32, 16, 3, 2, 1}},
    {"level1", {8, 32, 4, 4, 32, 3, 1, 1}},
    {"local", {8, 8, 16, 16, 16, 3, 2, 1}},
};

struct Buffers {
  std::vector<Real> in, w, b, out, cols, gout, gin, gw, gb;
  explicit Buffers(const k::ConvGeometry& g) {
    const std::size_t in_n = g.batch * g.in_channels * g.height * g.width;
    const std::size_t out_n = g.batch * g.out_channels * g.out_height() * g.out_width();
    Rng rng(1);
    auto fill = [&](std::vector<Real>& v, std::size_t n) {
      v.resize(n);
      for (Real& x : v) x = static_cast<Real>(rng.uniform(-1, 1));
    };
    fill(in, in_n);
    fill(w, g.out_channels * g.patch_size());
    fill(b, g.out_channels);
    fill(gout, out_n);
    out.assign(out_n, 0);
    cols.assign(g.batch * g.patch_size() * g.out_height() * g.out_width(), 0);
    gin.assign(in_n, 0);
    gw.assign(w.size(), 0);
    gb.assign(b.size(), 0);
  }
};

double conv_flops(const k::ConvGeometry& g) {
  return 2.0 * static_cast<double>(g.batch * g.out_channels * g.out_height() * g.out_width() *
                                   g.patch_size());
}

void BM_ConvForwardParallel(benchmark::State& state) {
  const auto& g = kShapes[state.range(0)].g;
  k::set_num_threads(static_cast<int>(state.range(1)));
  Buffers buf(g);
  for (auto _ : state) {
    k::conv2d_forward(g, buf.in.data(), buf.w.data(), buf.b.data(), buf.out.data(),
                      buf.cols.data());
    benchmark::DoNotOptimize(buf.out.data());
  }
  state.SetLabel(kShapes[state.range(0)].name);
  state.counters["flops"] =
      benchmark::Counter(conv_flops(g), benchmark::Counter::kIsIterationInvariantRate);
  k::set_num_threads(1);
}

void BM_ConvForwardReference(benchmark::State& state) {
  const auto& g = kShapes[state.range(0)].g;
  Buffers buf(g);
  for (auto _ : state) {
    k::reference::conv2d_forward(g, buf.in.data(), buf.w.data(), buf.b.data(), buf.out.data());
    benchmark::DoNotOptimize(buf.out.data());
  }
  state.SetLabel(kShapes[state.range(0)].name);
  state.counters["flops"] =
      benchmark::Counter(conv_flops(g), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvBackwardParallel(benchmark::State& state) {
  const auto& g = kShapes[state.range(0)].g;
  k::set_num_threads(static_cast<int>(state.range(1)));
  Buffers buf(g);
  k::conv2d_forward(g, buf.in.data(), buf.w.data(), buf.b.data(), buf.out.data(),
                    buf.cols.data());
  for (auto _ : state) {
    k::conv2d_backward(g, buf.gout.data(), buf.in.data(), buf.cols.data(), buf.w.data(),
                       buf.gin.data(), buf.gw.data(), buf.gb.data());
    benchmark::DoNotOptimize(buf.gin.data());
  }
  state.SetLabel(kShapes[state.range(0)].name);
  k::set_num_threads(1);
}

void BM_ConvBackwardReference(benchmark::State& state) {
  const auto& g = kShapes[state.range(0)].g;
  Buffers buf(g);
  for (auto _ : state) {
    k::reference::conv2d_backward_input(g, buf.gout.data(), buf.w.data(), buf.gin.data());
    k::reference::conv2d_backward_weight(g, buf.gout.data(), buf.in.data(), buf.gw.data(),
                                         buf.gb.data());
    benchmark::DoNotOptimize(buf.gin.data());
  }
  state.SetLabel(kShapes[state.range(0)].name);
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int s = 0; s < 4; ++s) b->Args({s});
}

void shapes_threads(benchmark::internal::Benchmark* b) {
  for (int s = 0; s < 4; ++s)
    for (int t : {1, 2, 4}) b->Args({s, t});
}

BENCHMARK(BM_ConvForwardReference)->Apply(shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvForwardParallel)->Apply(shapes_threads)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardReference)->Apply(shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardParallel)->Apply(shapes_threads)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
