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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace prs {

struct AnchorSpec {
  std::vector<double> base_sizes{16, 24, 32};
  std::vector<double> ratios{0.5, 1.0, 2.0};  // height / width
  std::vector<std::size_t> strides{8, 16, 32};

  std::size_t levels() const { return base_sizes.size(); }
};

enum class RankLossMode { kMargin, kLiteral };
enum class ConfidenceMode { kCorrected, kLiteral };

struct ModelConfig {
  std::size_t image_size = 64;
  std::size_t in_channels = 1;
  std::vector<std::size_t> stem_channels{8, 16};
  std::vector<std::size_t> level_channels{16, 32, 64};
  std::size_t level_stride = 2;
  AnchorSpec anchors;
  std::size_t top_m = 3;
  double iou_threshold = 0.3;
  std::size_t crop_size = 32;
  std::vector<std::size_t> local_channels{8, 16, 32};
  std::size_t score_hidden = 0;  // 0: 1x1 conv straight to scores
  bool no_relation = false;
  bool no_selection = false;
  RankLossMode rank_loss = RankLossMode::kMargin;
  ConfidenceMode confidence = ConfidenceMode::kCorrected;
  double part_loss_weight = 1.0;

  /// Downsampling factor of pyramid level `level` relative to the input.
  std::size_t level_downsample(std::size_t level) const;
  std::size_t local_feature_dim() const { return local_channels.back(); }
  std::size_t global_feature_dim() const { return level_channels.back(); }
  std::size_t joint_feature_dim() const;
};

struct TrainingConfig {
  std::size_t batch_size = 8;
  std::size_t epochs = 40;
  double base_lr = 1e-3;
  std::size_t decay_every = 15;
  double decay_factor = 0.1;
  bool hflip = true;
  double hit_iou = 0.25;
};

struct DataConfig {
  std::string path;  // existing dataset directory; empty when generating
  std::size_t n = 2000;
  std::size_t image_size = 64;
  double min_age = 0.0;
  double max_age = 228.0;
  std::size_t box_min = 16;
  std::size_t box_max = 24;
  bool gender_effect = true;
  double gender_offset = 0.1;
  std::size_t clutter_blobs = 10;
  double noise_std = 0.02;
  double train_fraction = 0.8;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  TrainingConfig training;
  DataConfig data;
};

/// Parses and validates; throws ConfigError naming the offending field.
/// Unknown keys are rejected, missing keys take the defaults above.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

/// Applies a named ablation: "full", "no_relation", "no_selection", "baseline".
void apply_ablation(ModelConfig& m, const std::string& ablation);

/// Learning rate at `epoch`: base_lr * factor^floor(epoch / decay_every).
double lr_schedule(std::size_t epoch, double base_lr, std::size_t decay_every, double factor);

}  // namespace prs
