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

#include "prs/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "prs/error.hpp"

namespace prs {

using nlohmann::json;

std::size_t ModelConfig::level_downsample(std::size_t level) const {
  std::size_t f = std::size_t{1} << stem_channels.size();
  for (std::size_t i = 0; i <= level; ++i) f *= level_stride;
  return f;
}

std::size_t ModelConfig::joint_feature_dim() const {
  return (no_selection ? 0 : local_feature_dim()) + global_feature_dim() + 2;
}

namespace {

// Reads fields of one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(name_ + ": unknown key '" + k + "'");
  }

  const std::string& name() const { return name_; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

std::string rank_mode_name(RankLossMode m) { return m == RankLossMode::kMargin ? "margin" : "literal"; }
std::string conf_mode_name(ConfidenceMode m) {
  return m == ConfidenceMode::kCorrected ? "corrected" : "literal";
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "config");
  root.get("seed", c.seed);

  if (const json* mj = root.child("model")) {
    Section s(*mj, "model");
    ModelConfig& m = c.model;
    s.get("image_size", m.image_size);
    s.get("in_channels", m.in_channels);
    s.get("stem_channels", m.stem_channels);
    s.get("level_channels", m.level_channels);
    s.get("level_stride", m.level_stride);
    if (const json* aj = s.child("anchors")) {
      Section a(*aj, "model.anchors");
      a.get("base_sizes", m.anchors.base_sizes);
      a.get("ratios", m.anchors.ratios);
      a.get("strides", m.anchors.strides);
      a.finish();
    }
    s.get("top_m", m.top_m);
    s.get("iou_threshold", m.iou_threshold);
    s.get("crop_size", m.crop_size);
    s.get("local_channels", m.local_channels);
    s.get("score_hidden", m.score_hidden);
    s.get("no_relation", m.no_relation);
    s.get("no_selection", m.no_selection);
    std::string rank = rank_mode_name(m.rank_loss), conf = conf_mode_name(m.confidence);
    s.get("rank_loss", rank);
    s.get("confidence", conf);
    if (rank == "margin") m.rank_loss = RankLossMode::kMargin;
    else if (rank == "literal") m.rank_loss = RankLossMode::kLiteral;
    else fail("model.rank_loss", "expected 'margin' or 'literal', got '" + rank + "'");
    if (conf == "corrected") m.confidence = ConfidenceMode::kCorrected;
    else if (conf == "literal") m.confidence = ConfidenceMode::kLiteral;
    else fail("model.confidence", "expected 'corrected' or 'literal', got '" + conf + "'");
    s.get("part_loss_weight", m.part_loss_weight);
    s.finish();
  }

  if (const json* tj = root.child("training")) {
    Section s(*tj, "training");
    TrainingConfig& t = c.training;
    s.get("batch_size", t.batch_size);
    s.get("epochs", t.epochs);
    s.get("base_lr", t.base_lr);
    s.get("decay_every", t.decay_every);
    s.get("decay_factor", t.decay_factor);
    s.get("hflip", t.hflip);
    s.get("hit_iou", t.hit_iou);
    s.finish();
  }

  if (const json* dj = root.child("data")) {
    Section s(*dj, "data");
    DataConfig& d = c.data;
    s.get("path", d.path);
    s.get("n", d.n);
    s.get("image_size", d.image_size);
    s.get("min_age", d.min_age);
    s.get("max_age", d.max_age);
    s.get("box_min", d.box_min);
    s.get("box_max", d.box_max);
    s.get("gender_effect", d.gender_effect);
    s.get("gender_offset", d.gender_offset);
    s.get("clutter_blobs", d.clutter_blobs);
    s.get("noise_std", d.noise_std);
    s.get("train_fraction", d.train_fraction);
    s.finish();
  }
  root.finish();
  validate(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  const ModelConfig& m = c.model;
  const TrainingConfig& t = c.training;
  const DataConfig& d = c.data;
  return json{
      {"seed", c.seed},
      {"model",
       {{"image_size", m.image_size},
        {"in_channels", m.in_channels},
        {"stem_channels", m.stem_channels},
        {"level_channels", m.level_channels},
        {"level_stride", m.level_stride},
        {"anchors",
         {{"base_sizes", m.anchors.base_sizes},
          {"ratios", m.anchors.ratios},
          {"strides", m.anchors.strides}}},
        {"top_m", m.top_m},
        {"iou_threshold", m.iou_threshold},
        {"crop_size", m.crop_size},
        {"local_channels", m.local_channels},
        {"score_hidden", m.score_hidden},
        {"no_relation", m.no_relation},
        {"no_selection", m.no_selection},
        {"rank_loss", rank_mode_name(m.rank_loss)},
        {"confidence", conf_mode_name(m.confidence)},
        {"part_loss_weight", m.part_loss_weight}}},
      {"training",
       {{"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"base_lr", t.base_lr},
        {"decay_every", t.decay_every},
        {"decay_factor", t.decay_factor},
        {"hflip", t.hflip},
        {"hit_iou", t.hit_iou}}},
      {"data",
       {{"path", d.path},
        {"n", d.n},
        {"image_size", d.image_size},
        {"min_age", d.min_age},
        {"max_age", d.max_age},
        {"box_min", d.box_min},
        {"box_max", d.box_max},
        {"gender_effect", d.gender_effect},
        {"gender_offset", d.gender_offset},
        {"clutter_blobs", d.clutter_blobs},
        {"noise_std", d.noise_std},
        {"train_fraction", d.train_fraction}}}};
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const RunConfig& c) {
  const ModelConfig& m = c.model;
  if (m.image_size == 0) fail("model.image_size", "must be positive");
  if (m.in_channels == 0) fail("model.in_channels", "must be positive");
  if (m.stem_channels.empty()) fail("model.stem_channels", "needs at least one stem block");
  if (m.level_channels.empty()) fail("model.level_channels", "needs at least one level");
  for (std::size_t ch : m.stem_channels)
    if (ch == 0) fail("model.stem_channels", "channel counts must be positive");
  for (std::size_t ch : m.level_channels)
    if (ch == 0) fail("model.level_channels", "channel counts must be positive");
  if (m.level_stride < 1) fail("model.level_stride", "must be positive");
  const std::size_t total = m.level_downsample(m.level_channels.size() - 1);
  if (m.image_size % total != 0)
    fail("model.image_size", std::to_string(m.image_size) + " not divisible by total stride " +
                                 std::to_string(total));
  const AnchorSpec& a = m.anchors;
  if (a.base_sizes.size() != m.level_channels.size() || a.strides.size() != a.base_sizes.size())
    fail("model.anchors", "need one base size and stride per pyramid level");
  if (a.ratios.empty()) fail("model.anchors.ratios", "must not be empty");
  for (double r : a.ratios)
    if (!(r > 0)) fail("model.anchors.ratios", "ratios must be positive");
  for (double b : a.base_sizes)
    if (!(b > 0)) fail("model.anchors.base_sizes", "sizes must be positive");
  for (std::size_t l = 0; l < a.strides.size(); ++l) {
    if (a.strides[l] != m.level_downsample(l))
      fail("model.anchors.strides", "level " + std::to_string(l) + " stride " +
                                        std::to_string(a.strides[l]) +
                                        " does not match feature stride " +
                                        std::to_string(m.level_downsample(l)));
  }
  if (m.top_m < 1) fail("model.top_m", "must be at least 1");
  if (!(m.iou_threshold > 0 && m.iou_threshold < 1)) fail("model.iou_threshold", "must lie in (0,1)");
  if (m.crop_size < 2) fail("model.crop_size", "must be at least 2");
  if (m.local_channels.empty()) fail("model.local_channels", "needs at least one block");
  for (std::size_t ch : m.local_channels)
    if (ch == 0) fail("model.local_channels", "channel counts must be positive");
  if (m.crop_size % (std::size_t{1} << m.local_channels.size()) != 0)
    fail("model.crop_size", "must be divisible by 2^len(local_channels)");
  if (!(m.part_loss_weight >= 0)) fail("model.part_loss_weight", "must be non-negative");

  const TrainingConfig& t = c.training;
  if (t.batch_size < 1) fail("training.batch_size", "must be at least 1");
  if (!(t.base_lr > 0) || !std::isfinite(t.base_lr)) fail("training.base_lr", "must be positive");
  if (t.decay_every < 1) fail("training.decay_every", "must be at least 1");
  if (!(t.decay_factor > 0 && t.decay_factor <= 1)) fail("training.decay_factor", "must lie in (0,1]");
  if (!(t.hit_iou >= 0 && t.hit_iou < 1)) fail("training.hit_iou", "must lie in [0,1)");

  const DataConfig& d = c.data;
  if (d.n < 1) fail("data.n", "must be at least 1");
  if (d.image_size == 0) fail("data.image_size", "must be positive");
  if (!(d.max_age > d.min_age)) fail("data.max_age", "must exceed min_age");
  if (d.box_min < 6 || d.box_min > d.box_max) fail("data.box_min", "need 6 <= box_min <= box_max");
  if (d.box_max > d.image_size) fail("data.box_max", "box does not fit the image");
  if (!(d.gender_offset >= 0 && d.gender_offset <= 0.1)) fail("data.gender_offset", "must lie in [0, 0.1]");
  if (!(d.noise_std >= 0)) fail("data.noise_std", "must be non-negative");
  if (!(d.train_fraction > 0 && d.train_fraction < 1)) fail("data.train_fraction", "must lie in (0,1)");
}

void apply_ablation(ModelConfig& m, const std::string& ablation) {
  if (ablation == "full") {
    m.no_relation = false;
    m.no_selection = false;
  } else if (ablation == "no_relation") {
    m.no_relation = true;
    m.no_selection = false;
  } else if (ablation == "no_selection") {
    m.no_relation = false;
    m.no_selection = true;
  } else if (ablation == "baseline") {
    m.no_relation = true;
    m.no_selection = true;
  } else {
    throw ConfigError("unknown ablation '" + ablation +
                      "' (expected full, no_relation, no_selection, baseline)");
  }
}

double lr_schedule(std::size_t epoch, double base_lr, std::size_t decay_every, double factor) {
  // Divide by the integral reciprocal so decimal rates like 1e-3 -> 1e-5 stay exact.
  const double steps = static_cast<double>(epoch / decay_every);
  const double inv = 1.0 / factor;
  if (inv == std::round(inv)) return base_lr / std::pow(inv, steps);
  return base_lr * std::pow(factor, steps);
}

}  // namespace prs
