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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prs/config.hpp"
#include "prs/parameters.hpp"
#include "prs/relation.hpp"
#include "prs/selection.hpp"
#include "prs/synthetic.hpp"
#include "prs/tensor.hpp"

namespace prs {

/// One-hot gender feature of dimension 2.
struct GenderCode {
  int index = 0;  // 0 or 1

  explicit GenderCode(int i);
  Tensor one_hot() const;  // 1 x 2
};

struct Prediction {
  Tensor joint;             // 1 x 1, normalised target units
  double y_joint = 0;       // original units
  std::vector<ScoredPart> parts;  // selected, descending score
  Tensor part_scores;       // length M, gathered anchor scores
  Tensor part_predictions;  // length M, normalised target units
  ContextPyramid pyramid;
  std::size_t feature_dim = 0;  // width of the concatenated joint input
};

struct LossBreakdown {
  double total = 0;
  double rank = 0;
  double regression = 0;
};

struct LossTerms {
  Tensor total;
  Tensor rank;
  Tensor regression;
  LossBreakdown values;
};

/// Regression model on local, global and gender features.
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const AnchorSet& anchors() const { return anchors_; }

  // Targets are standardised with these before the loss.
  double target_mean = 0;
  double target_std = 1;

  double normalise(double y) const { return (y - target_mean) / target_std; }
  double denormalise(double z) const { return target_mean + target_std * z; }

  /// `image` is 1 x C x H x W.
  Prediction forward(const Tensor& image, GenderCode gender) const;

  const Tensor& joint_weight() const { return joint_weight_; }

 private:
  ModelConfig cfg_;
  ParameterSet params_;
  Backbone backbone_;
  std::vector<ScoreHead> score_heads_;
  LocalNet local_net_;
  Tensor joint_weight_, joint_bias_;
  AnchorSet anchors_;
};

/// corrected: 1 - sigmoid(|e|), decreasing in the error, C(0) = 0.5.
/// literal:   1 - sigmoid(-|e|), increasing in the error.
double confidence(double y_pred, double y_true, ConfidenceMode mode);

/// Sum over ordered pairs (i, j) with C_j > C_i of
///   margin:  max(1 - (S_j - S_i), 0)
///   literal: max(1 - S_i - S_j, 0)
/// `scores` is rank 1 and may be on the tape.
Tensor ranking_loss(const Tensor& scores, std::span<const double> confidences, RankLossMode mode);

/// Fills per-part prediction/confidence and returns the loss tensors.
/// regression = (y - y*)^2 + part_loss_weight * mean_i (y_i - y*)^2 in
/// normalised units; total = rank + regression.
LossTerms total_loss(Prediction& pred, double y_true, const Model& model);

/// w <- w - lr * g for every parameter, then zero the gradients.
void sgd_step(ParameterSet& params, double lr);

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0;
  double train_mae = 0;
  double eval_mae = 0;
  double loss_total = 0;
  double loss_rank = 0;
  double loss_reg = 0;
  std::optional<double> hit_rate;  // absent without part selection
};

struct SampleResult {
  std::string id;
  double y_true = 0;
  double y_pred = 0;
  double abs_err = 0;
  std::vector<ScoredPart> parts;
  bool hit = false;
};

struct EvalResult {
  double mae = 0;
  std::optional<double> hit_rate;
  std::vector<SampleResult> samples;
};

/// MAE in original units over `records`; shards samples across `threads`
/// with frozen parameters.
EvalResult evaluate(const Model& model, std::span<const synthetic::Record* const> records,
                    double hit_iou, int threads = 1);

/// Expected hit-rate when `m` distinct anchors are drawn uniformly at random.
double random_anchor_hit_rate(const AnchorSet& anchors,
                              std::span<const synthetic::Record* const> records, std::size_t m,
                              double hit_iou);

struct TrainResult {
  Model model;  // parameters after the last epoch
  ParameterSet best_params;
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Seeded SGD training over the dataset's train split, evaluating on the
/// eval split after every epoch. Throws NumericError on a non-finite loss.
TrainResult train(const synthetic::Dataset& data, const RunConfig& cfg,
                  const EpochCallback& on_epoch = {}, int eval_threads = 1);

}  // namespace prs
