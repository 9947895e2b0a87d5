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

#pragma once

#include <cstddef>
#include <span>

#include "prs/tensor.hpp"

// Raw numeric kernels behind the tensor ops. The default namespace holds the
// OpenMP-parallel versions; kernels::reference holds direct serial loops used
// as test oracles and benchmark baselines.
namespace prs {
inline namespace PRS_REAL_ABI {
namespace kernels {

/// Worker count for the parallel kernels on the calling thread (default 1).
void set_num_threads(int n);
int num_threads();

struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 0, height = 0, width = 0;
  std::size_t out_channels = 0, kernel = 1;
  std::size_t stride = 1, padding = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t patch_size() const { return in_channels * kernel * kernel; }
  bool is_pointwise() const { return kernel == 1 && stride == 1 && padding == 0; }
};

// C[m x n] = A[m x k] * B[k x n]   (accumulate when `accumulate`)
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
             Real* c, bool accumulate);
// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
                 Real* c);
// C[m x n] = A[k x m]^T * B[k x n]   (accumulate when `accumulate`)
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
             Real* c, bool accumulate);

// One image: col is patch_size x (out_h*out_w).
void im2col(const ConvGeometry& g, const Real* image, Real* col);
void col2im_acc(const ConvGeometry& g, const Real* col, Real* image);

/// Forward convolution via im2col + GEMM. `cols` receives batch*patch*out
/// values for reuse in the backward pass (unused for pointwise kernels).
void conv2d_forward(const ConvGeometry& g, const Real* input, const Real* weight,
                    const Real* bias, Real* output, Real* cols);

/// Accumulates into whichever of grad_input / grad_weight / grad_bias is
/// non-null.
void conv2d_backward(const ConvGeometry& g, const Real* grad_output, const Real* input,
                     const Real* cols, const Real* weight, Real* grad_input,
                     Real* grad_weight, Real* grad_bias);

namespace reference {

void conv2d_forward(const ConvGeometry& g, const Real* input, const Real* weight,
                    const Real* bias, Real* output);
void conv2d_backward_input(const ConvGeometry& g, const Real* grad_output,
                           const Real* weight, Real* grad_input);
void conv2d_backward_weight(const ConvGeometry& g, const Real* grad_output,
                            const Real* input, Real* grad_weight, Real* grad_bias);
// C[m x n] = A[m x k] * B[k x n]
void matmul(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
            Real* c);

}  // namespace reference
}  // namespace kernels
}  // namespace PRS_REAL_ABI
}  // namespace prs
