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
#include <vector>

#include "prs/config.hpp"
#include "prs/parameters.hpp"
#include "prs/random.hpp"
#include "prs/tensor.hpp"

namespace prs {

struct ConvParams {
  Tensor weight;  // O x I x K x K
  Tensor bias;    // O
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Applies the convolution followed by relu.
Tensor conv_relu(const Tensor& x, const ConvParams& p);

/// Three 1x1 transforms of one pyramid level.
struct RelationLevelParams {
  ConvParams relation;
  ConvParams trunk;
  ConvParams residual;
};

struct GateOutput {
  Tensor context;   // F = T * sigmoid(R) + D
  Tensor relation;  // raw R (pre-sigmoid); empty tensor when the gate is off
};

/// Gated context representation of one level. With `gate` false the
/// sigmoid(R) factor is replaced by ones, giving trunk + residual.
GateOutput relation_gate(const Tensor& x, const RelationLevelParams& params, bool gate = true);

struct PyramidLevel {
  Tensor context;
  Tensor relation;  // raw R; empty (rank 0) when the gate is disabled
};

struct ContextPyramid {
  std::vector<PyramidLevel> levels;
  Tensor global;  // 1 x C spatial mean of the last context map

  /// sigmoid(R) of a level, detached.
  Tensor relation_map(std::size_t level) const;
};

/// Stem blocks, per-level stages and per-level relation transforms.
struct Backbone {
  std::vector<ConvParams> stem;
  std::vector<ConvParams> stages;
  std::vector<RelationLevelParams> relation;
};

/// Creates the backbone parameters, registering them under "stem.*" and
/// "level.<i>.*".
Backbone make_backbone(const ModelConfig& cfg, ParameterSet& params, Rng& rng);

/// Runs stem and stages. Each level's context map is the input of the next
/// stage.
ContextPyramid build_pyramid(const Tensor& image, const Backbone& backbone, bool gate = true);

/// Fresh conv parameters with Glorot weights registered as <name>.weight/.bias.
ConvParams make_conv(ParameterSet& params, const std::string& name, std::size_t in,
                     std::size_t out, std::size_t kernel, std::size_t stride,
                     std::size_t padding, Rng& rng);

}  // namespace prs
