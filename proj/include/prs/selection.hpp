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
#include <optional>
#include <span>
#include <vector>

#include "prs/config.hpp"
#include "prs/ops.hpp"
#include "prs/parameters.hpp"
#include "prs/relation.hpp"
#include "prs/tensor.hpp"

namespace prs {

/// Axis-aligned rectangle in pixel coordinates, x1 < x2 and y1 < y2.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  Box clamped(double w, double h) const;
  Box flipped_horizontal(double image_width) const;
  bool operator==(const Box&) const = default;
};

double iou(const Box& a, const Box& b);

struct Anchor {
  Box box;        // clamped to the image
  Box unclamped;  // as placed on the grid
  std::size_t level = 0;
  std::size_t cell = 0;         // row-major cell on the level grid
  std::size_t ratio_index = 0;  // index into AnchorSpec::ratios
};

struct AnchorSet {
  std::vector<Anchor> anchors;
  std::vector<std::size_t> grid_h, grid_w;  // per level
  std::size_t excluded = 0;  // anchors dropped for collapsing to zero area
};

/// Enumerates level, then cell (row-major), then ratio. Centres sit on the
/// stride grid offset by stride/2; width = base/sqrt(ratio), height =
/// base*sqrt(ratio).
AnchorSet generate_anchors(std::size_t image_h, std::size_t image_w, const AnchorSpec& spec);

struct ScoredPart {
  Box box;
  double score = 0;
  std::size_t level = 0;
  std::size_t anchor_index = 0;  // position in the AnchorSet the score came from
  std::optional<double> prediction;
  std::optional<double> confidence;
};

/// Greedy suppression; output in descending score order, ties broken by
/// lower anchor index.
std::vector<ScoredPart> nms(std::vector<ScoredPart> parts, double iou_threshold);

/// Joint sort over levels, nms, then the first `m` survivors.
std::vector<ScoredPart> select_top_m(std::vector<ScoredPart> parts, std::size_t m,
                                     double iou_threshold);

/// Per-level scoring convolution emitting one score per ratio and cell.
struct ScoreHead {
  std::optional<ConvParams> hidden;
  ConvParams out;
};

std::vector<ScoreHead> make_score_heads(const ModelConfig& cfg, ParameterSet& params, Rng& rng);

/// Scores aligned with `anchors` (one per entry, any order). Level l is
/// scored from the level-l context map.
Tensor score_anchors(const ContextPyramid& pyramid, std::span<const ScoreHead> heads,
                     std::span<const Anchor> anchors, std::size_t num_ratios);

/// Integer pixel bounds of a box (rounded, clamped to the image).
PixelRect pixel_rect(const Box& box, std::size_t image_h, std::size_t image_w);

/// Bilinear resample of the box region of an NCHW image. Differentiable in
/// the pixels, not in the box.
Tensor crop_resize(const Tensor& image, const Box& box, std::size_t out_h, std::size_t out_w);

struct LocalNet {
  std::vector<ConvParams> blocks;  // stride-2 conv + relu
  Tensor part_head_weight;         // D x 1
  Tensor part_head_bias;           // 1
};

LocalNet make_local_net(const ModelConfig& cfg, ParameterSet& params, Rng& rng);

/// Feature vector (1 x D) of one region crop.
Tensor region_feature(const Tensor& crop, const LocalNet& net);

struct LocalFeatures {
  Tensor local;                     // 1 x D, sum over parts
  std::vector<Tensor> per_part;     // each 1 x D
  Tensor predictions;               // length M, per-part regression output
};

LocalFeatures local_feature(std::span<const ScoredPart> parts, const Tensor& image,
                            const LocalNet& net, std::size_t crop_size);

}  // namespace prs
