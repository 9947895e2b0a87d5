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

#include "prs/export.hpp"

#include <cstdio>
#include <fstream>

namespace prs {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> history) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const EpochMetrics& m : history) {
    out += std::to_string(m.epoch) + ',' + format_real(m.lr) + ',' + format_real(m.train_mae) +
           ',' + format_real(m.eval_mae) + ',' + format_real(m.loss_total) + ',' +
           format_real(m.loss_rank) + ',' + format_real(m.loss_reg) + ',' +
           (m.hit_rate ? format_real(*m.hit_rate) : "") + '\n';
  }
  write_text(path, out);
}

void append_selection_rows(std::string& out, const std::string& image_id,
                           std::span<const ScoredPart> parts) {
  for (std::size_t r = 0; r < parts.size(); ++r) {
    const ScoredPart& p = parts[r];
    out += image_id + ',' + std::to_string(r) + ',' + std::to_string(p.level) + ',' +
           format_real(p.box.x1) + ',' + format_real(p.box.y1) + ',' + format_real(p.box.x2) +
           ',' + format_real(p.box.y2) + ',' + format_real(p.score) + ',' +
           (p.prediction ? format_real(*p.prediction) : "") + ',' +
           (p.confidence ? format_real(*p.confidence) : "") + '\n';
  }
}

void write_selection_csv(const std::filesystem::path& path, std::span<const SampleResult> samples) {
  std::string out = std::string(kSelectionHeader) + "\n";
  for (const SampleResult& s : samples) append_selection_rows(out, s.id, s.parts);
  write_text(path, out);
}

void write_anchor_csv(const std::filesystem::path& path, const AnchorSet& anchors) {
  std::string out = std::string(kSelectionHeader) + "\n";
  for (std::size_t i = 0; i < anchors.anchors.size(); ++i) {
    const Anchor& a = anchors.anchors[i];
    out += "anchors," + std::to_string(i) + ',' + std::to_string(a.level) + ',' +
           format_real(a.box.x1) + ',' + format_real(a.box.y1) + ',' + format_real(a.box.x2) +
           ',' + format_real(a.box.y2) + ",,,\n";
  }
  write_text(path, out);
}

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const SampleResult> samples) {
  std::string out = std::string(kPredictionsHeader) + "\n";
  for (const SampleResult& s : samples)
    out += s.id + ',' + format_real(s.y_true) + ',' + format_real(s.y_pred) + ',' +
           format_real(s.abs_err) + '\n';
  write_text(path, out);
}

}  // namespace prs
