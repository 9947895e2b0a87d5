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

#include <filesystem>
#include <vector>

#include "prs/assessment.hpp"
#include "prs/config.hpp"

namespace prs {

struct CheckpointInfo {
  std::size_t epoch = 0;
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;
};

/// Directory of <parameter>.prst files plus manifest.json (config, epoch,
/// seed, target scaling, parameter shapes, metric history).
void save_checkpoint(const std::filesystem::path& dir, const Model& model,
                     const RunConfig& cfg, const CheckpointInfo& info);

struct LoadedCheckpoint {
  RunConfig config;
  Model model;
  CheckpointInfo info;
};

/// Throws CheckpointError naming the offending file on any mismatch or
/// malformed tensor.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace prs
