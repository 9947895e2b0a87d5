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

#include "prs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prs/init.hpp"
#include "prs/ops.hpp"

namespace prs {

Box Box::clamped(double w, double h) const {
  return {std::clamp(x1, 0.0, w), std::clamp(y1, 0.0, h), std::clamp(x2, 0.0, w),
          std::clamp(y2, 0.0, h)};
}

Box Box::flipped_horizontal(double image_width) const {
  return {image_width - x2, y1, image_width - x1, y2};
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

AnchorSet generate_anchors(std::size_t image_h, std::size_t image_w, const AnchorSpec& spec) {
  if (spec.base_sizes.size() != spec.strides.size())
    throw ConfigError("anchor spec needs one stride per base size");
  AnchorSet set;
  const double w = static_cast<double>(image_w), h = static_cast<double>(image_h);
  for (std::size_t l = 0; l < spec.levels(); ++l) {
    const std::size_t stride = spec.strides[l];
    if (stride == 0 || image_h % stride != 0 || image_w % stride != 0)
      throw ConfigError("anchor stride " + std::to_string(stride) + " does not divide image " +
                        std::to_string(image_h) + "x" + std::to_string(image_w));
    const std::size_t gh = image_h / stride, gw = image_w / stride;
    set.grid_h.push_back(gh);
    set.grid_w.push_back(gw);
    const double base = spec.base_sizes[l];
    for (std::size_t gy = 0; gy < gh; ++gy)
      for (std::size_t gx = 0; gx < gw; ++gx) {
        const double cx = (static_cast<double>(gx) + 0.5) * static_cast<double>(stride);
        const double cy = (static_cast<double>(gy) + 0.5) * static_cast<double>(stride);
        for (std::size_t r = 0; r < spec.ratios.size(); ++r) {
          const double root = std::sqrt(spec.ratios[r]);
          const double aw = base / root, ah = base * root;
          Anchor a;
          a.unclamped = {cx - aw / 2, cy - ah / 2, cx + aw / 2, cy + ah / 2};
          a.box = a.unclamped.clamped(w, h);
          a.level = l;
          a.cell = gy * gw + gx;
          a.ratio_index = r;
          if (a.box.width() <= 0 || a.box.height() <= 0) {
            ++set.excluded;
            continue;
          }
          set.anchors.push_back(a);
        }
      }
  }
  return set;
}

namespace {

void sort_by_score(std::vector<ScoredPart>& parts) {
  std::stable_sort(parts.begin(), parts.end(), [](const ScoredPart& a, const ScoredPart& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.anchor_index < b.anchor_index;
  });
}

std::vector<ScoredPart> greedy(std::vector<ScoredPart> parts, double threshold,
                               std::size_t limit) {
  sort_by_score(parts);
  std::vector<ScoredPart> kept;
  for (const ScoredPart& p : parts) {
    if (kept.size() >= limit) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const ScoredPart& k) {
      return iou(k.box, p.box) > threshold;
    });
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

}  // namespace

std::vector<ScoredPart> nms(std::vector<ScoredPart> parts, double iou_threshold) {
  const std::size_t n = parts.size();
  return greedy(std::move(parts), iou_threshold, n);
}

std::vector<ScoredPart> select_top_m(std::vector<ScoredPart> parts, std::size_t m,
                                     double iou_threshold) {
  // Greedy suppression keeps survivors in order, so stopping after m equals
  // suppressing everything and truncating.
  return greedy(std::move(parts), iou_threshold, m);
}

std::vector<ScoreHead> make_score_heads(const ModelConfig& cfg, ParameterSet& params, Rng& rng) {
  std::vector<ScoreHead> heads;
  const std::size_t ratios = cfg.anchors.ratios.size();
  for (std::size_t l = 0; l < cfg.level_channels.size(); ++l) {
    const std::string prefix = "score." + std::to_string(l);
    ScoreHead h;
    std::size_t ch = cfg.level_channels[l];
    if (cfg.score_hidden > 0) {
      h.hidden = make_conv(params, prefix + ".hidden", ch, cfg.score_hidden, 3, 1, 1, rng);
      ch = cfg.score_hidden;
    }
    h.out = make_conv(params, prefix + ".out", ch, ratios, 1, 1, 0, rng);
    heads.push_back(std::move(h));
  }
  return heads;
}

Tensor score_anchors(const ContextPyramid& pyramid, std::span<const ScoreHead> heads,
                     std::span<const Anchor> anchors, std::size_t num_ratios) {
  if (heads.size() != pyramid.levels.size())
    throw ShapeError("score_anchors: " + std::to_string(heads.size()) + " heads for " +
                     std::to_string(pyramid.levels.size()) + " pyramid levels");
  std::vector<Tensor> maps;
  std::vector<std::size_t> offsets, planes;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < heads.size(); ++l) {
    Tensor x = pyramid.levels[l].context;
    if (heads[l].hidden) x = conv_relu(x, *heads[l].hidden);
    Tensor s = conv2d(x, heads[l].out.weight, heads[l].out.bias, 1, 0);
    if (s.dim(1) != num_ratios)
      throw ShapeError("score_anchors: head " + std::to_string(l) + " emits " +
                       std::to_string(s.dim(1)) + " maps, expected " + std::to_string(num_ratios));
    const std::size_t plane = s.dim(2) * s.dim(3);
    maps.push_back(reshape(s, {s.numel()}));
    offsets.push_back(offset);
    planes.push_back(plane);
    offset += s.numel();
  }
  std::vector<std::size_t> index;
  index.reserve(anchors.size());
  for (const Anchor& a : anchors) {
    if (a.level >= maps.size() || a.cell >= planes[a.level] || a.ratio_index >= num_ratios)
      throw ShapeError("score_anchors: anchor (level " + std::to_string(a.level) + ", cell " +
                       std::to_string(a.cell) + ") does not match the feature grid");
    index.push_back(offsets[a.level] + a.ratio_index * planes[a.level] + a.cell);
  }
  return gather(concat(std::span<const Tensor>(maps), 0), index);
}

PixelRect pixel_rect(const Box& box, std::size_t image_h, std::size_t image_w) {
  auto snap = [](double v, std::size_t hi) {
    const double r = std::round(v);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(hi)));
  };
  return {snap(box.x1, image_w), snap(box.y1, image_h), snap(box.x2, image_w),
          snap(box.y2, image_h)};
}

Tensor crop_resize(const Tensor& image, const Box& box, std::size_t out_h, std::size_t out_w) {
  if (image.rank() != 4) throw ShapeError("crop_resize: image must be N x C x H x W");
  const PixelRect r = pixel_rect(box, image.dim(2), image.dim(3));
  if (r.x1 <= r.x0 || r.y1 <= r.y0 || (r.x1 - r.x0) * (r.y1 - r.y0) < 4)
    throw ShapeError("crop_resize: degenerate box (" + std::to_string(box.x1) + "," +
                     std::to_string(box.y1) + "," + std::to_string(box.x2) + "," +
                     std::to_string(box.y2) + "), area below 4 px^2");
  return resample_rect(image, r, out_h, out_w);
}

LocalNet make_local_net(const ModelConfig& cfg, ParameterSet& params, Rng& rng) {
  LocalNet net;
  std::size_t ch = cfg.in_channels;
  for (std::size_t i = 0; i < cfg.local_channels.size(); ++i) {
    net.blocks.push_back(
        make_conv(params, "local." + std::to_string(i), ch, cfg.local_channels[i], 3, 2, 1, rng));
    ch = cfg.local_channels[i];
  }
  net.part_head_weight = params.add("part_head.weight", glorot_uniform({ch, 1}, ch, 1, rng));
  net.part_head_bias = params.add("part_head.bias", zeros_parameter({1}));
  return net;
}

Tensor region_feature(const Tensor& crop, const LocalNet& net) {
  Tensor x = crop;
  for (const auto& b : net.blocks) x = conv_relu(x, b);
  return spatial_mean(x);
}

LocalFeatures local_feature(std::span<const ScoredPart> parts, const Tensor& image,
                            const LocalNet& net, std::size_t crop_size) {
  if (parts.empty()) throw ShapeError("local_feature: needs at least one selected part");
  LocalFeatures out;
  std::vector<Tensor> preds;
  for (const ScoredPart& p : parts) {
    Tensor f = region_feature(crop_resize(image, p.box, crop_size, crop_size), net);
    preds.push_back(reshape(linear(f, net.part_head_weight, net.part_head_bias), {1}));
    out.local = out.per_part.empty() ? f : add(out.local, f);
    out.per_part.push_back(std::move(f));
  }
  out.predictions = concat(std::span<const Tensor>(preds), 0);
  return out;
}

}  // namespace prs
