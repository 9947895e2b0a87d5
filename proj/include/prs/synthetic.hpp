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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prs/config.hpp"
#include "prs/selection.hpp"
#include "prs/tensor.hpp"

// Seeded synthetic "radiographs": a framed box whose filled-area fraction is
// an affine function of the target age, on top of age-independent clutter.
namespace prs::synthetic {

/// Fill fraction at min_age and its span up to max_age (before the gender
/// offset).
inline constexpr double kFillAtMinAge = 0.1;
inline constexpr double kFillSpan = 0.7;

struct Layout {
  double age = 0;
  int gender = 0;  // 0 or 1
  Box box;         // integer pixel bounds of the informative region
};

struct Sample {
  Tensor image;  // 1 x H x W in [0, 1]
  double age = 0;
  int gender = 0;
  Box informative_box;
};

/// Draws age, gender and box placement; the first draws of the sample stream.
Layout draw_layout(Rng& rng, const DataConfig& cfg);

double fill_fraction(double age, int gender, const DataConfig& cfg);

/// Noise-free rendering of the informative region (side x side, row-major,
/// double precision): a one-pixel frame around stacked four-row bands, each
/// filled from its bottom row to fill_fraction() of its height. The partially
/// filled row is anti-aliased, so the fraction is exact.
std::vector<double> render_pattern(const Layout& layout, const DataConfig& cfg);

/// Mean over the banded interior rows divided by the pattern intensity.
double pattern_statistic(std::span<const double> region, std::size_t side);

/// Inverse of the generator: age from the statistic of a clean region.
double decode_age(double statistic, int gender, const DataConfig& cfg);

Sample generate_sample(std::uint64_t seed, const DataConfig& cfg);

/// Per-sample seed derived from the dataset seed and the sample index.
std::uint64_t sample_seed(std::uint64_t dataset_seed, std::size_t index);

std::string sample_id(std::size_t index);

/// Deterministic hash split of ids into train/eval.
bool is_train_id(const std::string& id, double train_fraction);

struct Record {
  std::string id;
  double age = 0;
  int gender = 0;
  Box box;
  std::uint64_t seed = 0;
  Tensor image;  // 1 x 1 x H x W
};

struct Dataset {
  std::vector<Record> records;
  double train_fraction = 0.8;

  std::vector<const Record*> split(bool train) const;
  const Record* find(const std::string& id) const;
};

/// Record `index` of the dataset described by `cfg`, identical to what
/// generate_dataset writes and load_dataset reads back.
Record generate_record(const RunConfig& cfg, std::size_t index);

/// All cfg.data.n records in memory, rendered on `threads` threads.
Dataset generate_in_memory(const RunConfig& cfg, int threads = 1);

/// Writes images/<id>.prst, manifest.csv and config.json under `out_dir`.
/// `threads` > 1 renders samples in parallel.
void generate_dataset(const RunConfig& cfg, const std::filesystem::path& out_dir, int threads);

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace prs::synthetic
