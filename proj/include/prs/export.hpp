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
#include <span>
#include <string>
#include <vector>

#include "prs/assessment.hpp"
#include "prs/selection.hpp"

namespace prs {

inline constexpr const char* kMetricsHeader =
    "epoch,lr,train_mae,eval_mae,loss_total,loss_rank,loss_reg,hit_rate";
inline constexpr const char* kSelectionHeader =
    "image_id,rank,level,x1,y1,x2,y2,score,prediction,confidence";
inline constexpr const char* kPredictionsHeader = "id,y_true,y_pred,abs_err";

/// Shortest round-tripping decimal ("%.17g").
std::string format_real(double v);

void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> history);

/// Appends one row per part, rank starting at 0 in list order.
void append_selection_rows(std::string& out, const std::string& image_id,
                           std::span<const ScoredPart> parts);
void write_selection_csv(const std::filesystem::path& path, std::span<const SampleResult> samples);

/// Full anchor set with blank score/prediction/confidence columns.
void write_anchor_csv(const std::filesystem::path& path, const AnchorSet& anchors);

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const SampleResult> samples);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace prs
