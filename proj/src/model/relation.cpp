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

#include "prs/relation.hpp"

#include "prs/init.hpp"
#include "prs/ops.hpp"

namespace prs {

Tensor conv_relu(const Tensor& x, const ConvParams& p) {
  return relu(conv2d(x, p.weight, p.bias, p.stride, p.padding));
}

namespace {

Tensor apply(const Tensor& x, const ConvParams& p) {
  return conv2d(x, p.weight, p.bias, p.stride, p.padding);
}

}  // namespace

GateOutput relation_gate(const Tensor& x, const RelationLevelParams& params, bool gate) {
  const std::size_t c_in = params.trunk.weight.dim(1);
  if (x.rank() != 4 || x.dim(1) != c_in)
    throw ShapeError("relation_gate: input " + shape_string(x.shape()) + " does not have " +
                     std::to_string(c_in) + " channels");
  const Tensor trunk = apply(x, params.trunk);
  const Tensor residual = apply(x, params.residual);
  if (!gate) return {add(trunk, residual), Tensor()};
  const Tensor r = apply(x, params.relation);
  return {add(mul(trunk, sigmoid(r)), residual), r};
}

Tensor ContextPyramid::relation_map(std::size_t level) const {
  const Tensor& r = levels.at(level).relation;
  if (r.rank() == 0) throw ConfigError("relation maps are unavailable with the gate disabled");
  NoGradGuard guard;
  return sigmoid(r.detach());
}

ConvParams make_conv(ParameterSet& params, const std::string& name, std::size_t in,
                     std::size_t out, std::size_t kernel, std::size_t stride,
                     std::size_t padding, Rng& rng) {
  ConvParams p;
  p.weight = params.add(name + ".weight",
                        glorot_uniform({out, in, kernel, kernel}, in * kernel * kernel,
                                       out * kernel * kernel, rng));
  p.bias = params.add(name + ".bias", zeros_parameter({out}));
  p.stride = stride;
  p.padding = padding;
  return p;
}

Backbone make_backbone(const ModelConfig& cfg, ParameterSet& params, Rng& rng) {
  Backbone b;
  std::size_t ch = cfg.in_channels;
  for (std::size_t i = 0; i < cfg.stem_channels.size(); ++i) {
    b.stem.push_back(make_conv(params, "stem." + std::to_string(i), ch, cfg.stem_channels[i],
                               3, 2, 1, rng));
    ch = cfg.stem_channels[i];
  }
  for (std::size_t l = 0; l < cfg.level_channels.size(); ++l) {
    const std::string prefix = "level." + std::to_string(l);
    const std::size_t out = cfg.level_channels[l];
    b.stages.push_back(make_conv(params, prefix + ".conv", ch, out, 3, cfg.level_stride, 1, rng));
    RelationLevelParams rel;
    rel.relation = make_conv(params, prefix + ".relation", out, out, 1, 1, 0, rng);
    rel.trunk = make_conv(params, prefix + ".trunk", out, out, 1, 1, 0, rng);
    rel.residual = make_conv(params, prefix + ".residual", out, out, 1, 1, 0, rng);
    b.relation.push_back(rel);
    ch = out;
  }
  return b;
}

ContextPyramid build_pyramid(const Tensor& image, const Backbone& backbone, bool gate) {
  if (image.rank() != 4) throw ShapeError("build_pyramid: image must be N x C x H x W");
  std::size_t total = 1;
  for (const auto& p : backbone.stem) total *= p.stride;
  for (const auto& p : backbone.stages) total *= p.stride;
  if (image.dim(2) % total != 0 || image.dim(3) % total != 0)
    throw ShapeError("build_pyramid: spatial size " + shape_string(image.shape()) +
                     " not divisible by total stride " + std::to_string(total));
  Tensor x = image;
  for (const auto& p : backbone.stem) x = conv_relu(x, p);
  ContextPyramid pyramid;
  for (std::size_t l = 0; l < backbone.stages.size(); ++l) {
    x = conv_relu(x, backbone.stages[l]);
    GateOutput g = relation_gate(x, backbone.relation[l], gate);
    pyramid.levels.push_back({g.context, g.relation});
    x = g.context;
  }
  pyramid.global = spatial_mean(x);
  return pyramid;
}

}  // namespace prs
