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
#include <vector>

#include "prs/tensor.hpp"

namespace prs {
inline namespace PRS_REAL_ABI {

/// Axis-aligned source rectangle for bilinear resampling, in pixels.
/// Half-open on the right/bottom: [x0, x1) x [y0, y1).
struct PixelRect {
  std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Convolution over NCHW input with OIKK weights.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding);

// x: N x F_in, weight: F_in x F_out, bias: F_out.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);

// Identical shapes, or either side holding a single element.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& x, Real c);
Tensor mul_scalar(const Tensor& x, Real c);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);

Tensor reshape(const Tensor& x, Shape shape);

/// Picks flat elements by index into a rank-1 tensor; repeated indices
/// accumulate gradient.
Tensor gather(const Tensor& x, std::span<const std::size_t> indices);

Tensor max_pool2d(const Tensor& x, std::size_t kernel, std::size_t stride);

/// N x C x H x W -> N x C, mean over the spatial axes.
Tensor spatial_mean(const Tensor& x);

/// Half-pixel-centre bilinear resize of an NCHW tensor.
Tensor resize_bilinear(const Tensor& x, std::size_t out_h, std::size_t out_w);

/// Bilinear resample of a sub-rectangle of an NCHW tensor. Sampling
/// positions are clamped to the rectangle, so pixels outside it never
/// contribute.
Tensor resample_rect(const Tensor& x, const PixelRect& rect, std::size_t out_h,
                     std::size_t out_w);

/// Mirrors an NCHW tensor along the width axis. Not recorded on the tape.
Tensor flip_horizontal(const Tensor& x);

}  // namespace PRS_REAL_ABI
}  // namespace prs
