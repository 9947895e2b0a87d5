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

#include "prs/kernels.hpp"

#include <algorithm>
#include <vector>

namespace prs {
inline namespace PRS_REAL_ABI {
namespace kernels {

namespace {
thread_local int tls_num_threads = 1;
}

void set_num_threads(int n) { tls_num_threads = std::max(1, n); }
int num_threads() { return tls_num_threads; }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
             Real* c, bool accumulate) {
  const int nt = tls_num_threads;
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (std::size_t i = 0; i < m; ++i) {
    Real* ci = c + i * n;
    if (!accumulate) std::fill(ci, ci + n, Real(0));
    const Real* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = ai[p];
      const Real* bp = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
                 Real* c) {
  const int nt = tls_num_threads;
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (std::size_t i = 0; i < m; ++i) {
    const Real* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const Real* bj = b + j * k;
      Real s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c[i * n + j] += s;
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
             Real* c, bool accumulate) {
  const int nt = tls_num_threads;
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (std::size_t i = 0; i < m; ++i) {
    Real* ci = c + i * n;
    if (!accumulate) std::fill(ci, ci + n, Real(0));
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = a[p * m + i];
      const Real* bp = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void im2col(const ConvGeometry& g, const Real* image, Real* col) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), plane = oh * ow;
  const std::size_t k = g.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const int nt = tls_num_threads;
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const Real* src = image + c * g.height * g.width;
    for (std::size_t kh = 0; kh < k; ++kh) {
      for (std::size_t kw = 0; kw < k; ++kw) {
        Real* row = col + ((c * k + kh) * k + kw) * plane;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + kh) - pad;
          Real* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, Real(0));
            continue;
          }
          const Real* srow = src + iy * w;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kw) - pad;
            dst[ox] = (ix >= 0 && ix < w) ? srow[ix] : Real(0);
          }
        }
      }
    }
  }
}

void col2im_acc(const ConvGeometry& g, const Real* col, Real* image) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), plane = oh * ow;
  const std::size_t k = g.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const int nt = tls_num_threads;
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    Real* dst = image + c * g.height * g.width;
    for (std::size_t kh = 0; kh < k; ++kh) {
      for (std::size_t kw = 0; kw < k; ++kw) {
        const Real* row = col + ((c * k + kh) * k + kw) * plane;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + kh) - pad;
          if (iy < 0 || iy >= h) continue;
          Real* drow = dst + iy * w;
          const Real* srow = row + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kw) - pad;
            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

void conv2d_forward(const ConvGeometry& g, const Real* input, const Real* weight,
                    const Real* bias, Real* output, Real* cols) {
  const std::size_t plane = g.out_height() * g.out_width();
  const std::size_t patch = g.patch_size();
  const std::size_t in_stride = g.in_channels * g.height * g.width;
  for (std::size_t b = 0; b < g.batch; ++b) {
    const Real* col = input + b * in_stride;
    if (!g.is_pointwise()) {
      Real* dst = cols + b * patch * plane;
      im2col(g, input + b * in_stride, dst);
      col = dst;
    }
    Real* out = output + b * g.out_channels * plane;
    gemm_nn(g.out_channels, plane, patch, weight, col, out, false);
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      const Real bo = bias[o];
      Real* row = out + o * plane;
      for (std::size_t p = 0; p < plane; ++p) row[p] += bo;
    }
  }
}

void conv2d_backward(const ConvGeometry& g, const Real* grad_output, const Real* input,
                     const Real* cols, const Real* weight, Real* grad_input,
                     Real* grad_weight, Real* grad_bias) {
  const std::size_t plane = g.out_height() * g.out_width();
  const std::size_t patch = g.patch_size();
  const std::size_t in_stride = g.in_channels * g.height * g.width;
  std::vector<Real> dcol;
  if (grad_input != nullptr && !g.is_pointwise()) dcol.resize(patch * plane);
  for (std::size_t b = 0; b < g.batch; ++b) {
    const Real* dout = grad_output + b * g.out_channels * plane;
    const Real* col = g.is_pointwise() ? input + b * in_stride : cols + b * patch * plane;
    if (grad_weight != nullptr) gemm_nt_acc(g.out_channels, patch, plane, dout, col, grad_weight);
    if (grad_bias != nullptr) {
      for (std::size_t o = 0; o < g.out_channels; ++o) {
        Real s = 0;
        const Real* row = dout + o * plane;
        for (std::size_t p = 0; p < plane; ++p) s += row[p];
        grad_bias[o] += s;
      }
    }
    if (grad_input != nullptr) {
      Real* gin = grad_input + b * in_stride;
      if (g.is_pointwise()) {
        gemm_tn(patch, plane, g.out_channels, weight, dout, gin, true);
      } else {
        gemm_tn(patch, plane, g.out_channels, weight, dout, dcol.data(), false);
        col2im_acc(g, dcol.data(), gin);
      }
    }
  }
}

namespace reference {

namespace {

// Returns true and the input offset when the tap lands inside the image.
bool tap(const ConvGeometry& g, std::size_t oy, std::size_t ox, std::size_t kh,
         std::size_t kw, std::size_t& iy, std::size_t& ix) {
  const auto y = static_cast<std::ptrdiff_t>(oy * g.stride + kh) -
                 static_cast<std::ptrdiff_t>(g.padding);
  const auto x = static_cast<std::ptrdiff_t>(ox * g.stride + kw) -
                 static_cast<std::ptrdiff_t>(g.padding);
  if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(g.height) ||
      x >= static_cast<std::ptrdiff_t>(g.width))
    return false;
  iy = static_cast<std::size_t>(y);
  ix = static_cast<std::size_t>(x);
  return true;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, const Real* input, const Real* weight,
                    const Real* bias, Real* output) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t o = 0; o < g.out_channels; ++o)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = bias[o];
          for (std::size_t c = 0; c < g.in_channels; ++c)
            for (std::size_t kh = 0; kh < k; ++kh)
              for (std::size_t kw = 0; kw < k; ++kw) {
                std::size_t iy, ix;
                if (!tap(g, oy, ox, kh, kw, iy, ix)) continue;
                acc += static_cast<double>(
                           weight[((o * g.in_channels + c) * k + kh) * k + kw]) *
                       input[((n * g.in_channels + c) * g.height + iy) * g.width + ix];
              }
          output[((n * g.out_channels + o) * oh + oy) * ow + ox] = static_cast<Real>(acc);
        }
}

void conv2d_backward_input(const ConvGeometry& g, const Real* grad_output,
                           const Real* weight, Real* grad_input) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t o = 0; o < g.out_channels; ++o)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const Real go = grad_output[((n * g.out_channels + o) * oh + oy) * ow + ox];
          for (std::size_t c = 0; c < g.in_channels; ++c)
            for (std::size_t kh = 0; kh < k; ++kh)
              for (std::size_t kw = 0; kw < k; ++kw) {
                std::size_t iy, ix;
                if (!tap(g, oy, ox, kh, kw, iy, ix)) continue;
                grad_input[((n * g.in_channels + c) * g.height + iy) * g.width + ix] +=
                    go * weight[((o * g.in_channels + c) * k + kh) * k + kw];
              }
        }
}

void conv2d_backward_weight(const ConvGeometry& g, const Real* grad_output,
                            const Real* input, Real* grad_weight, Real* grad_bias) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t o = 0; o < g.out_channels; ++o)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const Real go = grad_output[((n * g.out_channels + o) * oh + oy) * ow + ox];
          grad_bias[o] += go;
          for (std::size_t c = 0; c < g.in_channels; ++c)
            for (std::size_t kh = 0; kh < k; ++kh)
              for (std::size_t kw = 0; kw < k; ++kw) {
                std::size_t iy, ix;
                if (!tap(g, oy, ox, kh, kw, iy, ix)) continue;
                grad_weight[((o * g.in_channels + c) * k + kh) * k + kw] +=
                    go * input[((n * g.in_channels + c) * g.height + iy) * g.width + ix];
              }
        }
}

void matmul(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
            Real* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < k; ++p)
        acc += static_cast<double>(a[i * k + p]) * b[p * n + j];
      c[i * n + j] = static_cast<Real>(acc);
    }
}

}  // namespace reference
}  // namespace kernels
}  // namespace PRS_REAL_ABI
}  // namespace prs
