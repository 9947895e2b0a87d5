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

#include "prs/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "prs/init.hpp"
#include "prs/ops.hpp"
#include "prs/random.hpp"

namespace prs {

GenderCode::GenderCode(int i) : index(i) {
  if (i != 0 && i != 1) throw ConfigError("gender code must be 0 or 1, got " + std::to_string(i));
}

Tensor GenderCode::one_hot() const {
  Tensor t(Shape{1, 2});
  t.mutable_data()[static_cast<std::size_t>(index)] = Real(1);
  return t;
}

Model::Model(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  Rng rng(init_seed);
  // Every ablation registers the same parameters in the same order so shared
  // parts start from identical values.
  backbone_ = make_backbone(cfg_, params_, rng);
  score_heads_ = make_score_heads(cfg_, params_, rng);
  local_net_ = make_local_net(cfg_, params_, rng);
  const std::size_t dim = cfg_.joint_feature_dim();
  joint_weight_ = params_.add("joint_head.weight", glorot_uniform({dim, 1}, dim, 1, rng));
  joint_bias_ = params_.add("joint_head.bias", zeros_parameter({1}));
  anchors_ = generate_anchors(cfg_.image_size, cfg_.image_size, cfg_.anchors);
}

Prediction Model::forward(const Tensor& image, GenderCode gender) const {
  if (image.rank() != 4 || image.dim(0) != 1 || image.dim(1) != cfg_.in_channels ||
      image.dim(2) != cfg_.image_size || image.dim(3) != cfg_.image_size)
    throw ShapeError("forward: expected image 1x" + std::to_string(cfg_.in_channels) + "x" +
                     std::to_string(cfg_.image_size) + "x" + std::to_string(cfg_.image_size) +
                     ", got " + shape_string(image.shape()));
  Prediction pred;
  pred.pyramid = build_pyramid(image, backbone_, !cfg_.no_relation);
  std::vector<Tensor> features;
  if (!cfg_.no_selection) {
    const Tensor scores = score_anchors(pred.pyramid, score_heads_, anchors_.anchors,
                                        cfg_.anchors.ratios.size());
    std::vector<ScoredPart> candidates(anchors_.anchors.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const Anchor& a = anchors_.anchors[i];
      candidates[i] = {a.box, static_cast<double>(scores.data()[i]), a.level, i, {}, {}};
    }
    pred.parts = select_top_m(std::move(candidates), cfg_.top_m, cfg_.iou_threshold);
    std::vector<std::size_t> picked;
    for (const ScoredPart& p : pred.parts) picked.push_back(p.anchor_index);
    pred.part_scores = gather(scores, picked);
    LocalFeatures local = local_feature(pred.parts, image, local_net_, cfg_.crop_size);
    pred.part_predictions = local.predictions;
    features.push_back(local.local);
  }
  features.push_back(pred.pyramid.global);
  features.push_back(gender.one_hot());
  const Tensor joint_in = concat(std::span<const Tensor>(features), 1);
  pred.feature_dim = joint_in.dim(1);
  pred.joint = linear(joint_in, joint_weight_, joint_bias_);
  pred.y_joint = denormalise(pred.joint.item());
  return pred;
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double confidence(double y_pred, double y_true, ConfidenceMode mode) {
  const double err = std::abs(y_pred - y_true);
  return mode == ConfidenceMode::kCorrected ? 1.0 - stable_sigmoid(err)
                                            : 1.0 - stable_sigmoid(-err);
}

Tensor ranking_loss(const Tensor& scores, std::span<const double> confidences, RankLossMode mode) {
  if (scores.rank() != 1 || scores.numel() != confidences.size())
    throw ShapeError("ranking_loss: " + std::to_string(confidences.size()) +
                     " confidences for scores " + shape_string(scores.shape()));
  std::vector<std::size_t> lo, hi;  // C[hi] > C[lo]
  for (std::size_t i = 0; i < confidences.size(); ++i)
    for (std::size_t j = 0; j < confidences.size(); ++j)
      if (confidences[j] > confidences[i]) {
        lo.push_back(i);
        hi.push_back(j);
      }
  if (lo.empty()) return Tensor::scalar(0);
  const Tensor s_lo = gather(scores, lo);
  const Tensor s_hi = gather(scores, hi);
  const Tensor arg = mode == RankLossMode::kMargin ? sub(s_lo, s_hi)
                                                   : mul_scalar(add(s_lo, s_hi), Real(-1));
  return sum(relu(add_scalar(arg, Real(1))));
}

LossTerms total_loss(Prediction& pred, double y_true, const Model& model) {
  const ModelConfig& cfg = model.config();
  const auto target = static_cast<Real>(model.normalise(y_true));
  LossTerms t;
  t.regression = sum(square(add_scalar(pred.joint, -target)));
  if (!pred.parts.empty()) {
    std::vector<double> conf;
    for (std::size_t i = 0; i < pred.parts.size(); ++i) {
      const double z = pred.part_predictions.data()[i];
      const double c = confidence(z, target, cfg.confidence);
      pred.parts[i].prediction = model.denormalise(z);
      pred.parts[i].confidence = c;
      conf.push_back(c);
    }
    if (cfg.part_loss_weight > 0) {
      const Tensor part = mean(square(add_scalar(pred.part_predictions, -target)));
      t.regression = add(t.regression, mul_scalar(part, static_cast<Real>(cfg.part_loss_weight)));
    }
    t.rank = ranking_loss(pred.part_scores, conf, cfg.rank_loss);
  } else {
    t.rank = Tensor::scalar(0);
  }
  t.total = add(t.rank, t.regression);
  t.values = {t.total.item(), t.rank.item(), t.regression.item()};
  return t;
}

void sgd_step(ParameterSet& params, double lr) {
  if (!(lr >= 0)) throw ConfigError("learning rate must be non-negative");
  const auto step = static_cast<Real>(lr);
  for (const auto& [name, p] : params.entries()) {
    Tensor t = p;
    auto v = t.mutable_data();
    auto g = t.mutable_grad();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * g[i];
  }
  params.zero_grad();
}

EvalResult evaluate(const Model& model, std::span<const synthetic::Record* const> records,
                    double hit_iou, int threads) {
  EvalResult out;
  out.samples.resize(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  std::exception_ptr error;
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      NoGradGuard guard;
      const synthetic::Record& r = *records[static_cast<std::size_t>(i)];
      Prediction p = model.forward(r.image, GenderCode(r.gender));
      total_loss(p, r.age, model);
      SampleResult& s = out.samples[static_cast<std::size_t>(i)];
      s.id = r.id;
      s.y_true = r.age;
      s.y_pred = p.y_joint;
      s.abs_err = std::abs(p.y_joint - r.age);
      s.hit = std::any_of(p.parts.begin(), p.parts.end(),
                          [&](const ScoredPart& part) { return iou(part.box, r.box) > hit_iou; });
      s.parts = std::move(p.parts);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  if (records.empty()) return out;
  double total = 0;
  std::size_t hits = 0;
  for (const SampleResult& s : out.samples) {
    total += s.abs_err;
    hits += s.hit ? 1 : 0;
  }
  out.mae = total / static_cast<double>(records.size());
  if (!model.config().no_selection)
    out.hit_rate = static_cast<double>(hits) / static_cast<double>(records.size());
  return out;
}

double random_anchor_hit_rate(const AnchorSet& anchors,
                              std::span<const synthetic::Record* const> records, std::size_t m,
                              double hit_iou) {
  if (records.empty()) return 0.0;
  const auto n = static_cast<double>(anchors.anchors.size());
  double acc = 0;
  for (const synthetic::Record* r : records) {
    double k = 0;
    for (const Anchor& a : anchors.anchors) k += iou(a.box, r->box) > hit_iou ? 1 : 0;
    // P(no hit) = C(n - k, m) / C(n, m)
    double miss = 1.0;
    for (std::size_t t = 0; t < m; ++t)
      miss *= std::max(0.0, (n - k - static_cast<double>(t)) / (n - static_cast<double>(t)));
    acc += 1.0 - miss;
  }
  return acc / static_cast<double>(records.size());
}

TrainResult train(const synthetic::Dataset& data, const RunConfig& cfg,
                  const EpochCallback& on_epoch, int eval_threads) {
  validate(cfg);
  const auto train_set = data.split(true);
  const auto eval_set = data.split(false);
  if (train_set.empty() || eval_set.empty())
    throw ConfigError("dataset split leaves an empty train or eval set");

  TrainResult result{Model(cfg.model, derive_seed(cfg.seed, "init")), {}, 0, {}};
  Model& model = result.model;
  double mean = 0;
  for (const auto* r : train_set) mean += r->age;
  mean /= static_cast<double>(train_set.size());
  double var = 0;
  for (const auto* r : train_set) var += (r->age - mean) * (r->age - mean);
  var /= static_cast<double>(train_set.size());
  model.target_mean = mean;
  model.target_std = var > 0 ? std::sqrt(var) : 1.0;

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng augment_rng(derive_seed(cfg.seed, "augment"));
  std::vector<std::size_t> order(train_set.size());
  double best = std::numeric_limits<double>::infinity();
  const TrainingConfig& tc = cfg.training;

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr_schedule(epoch, tc.base_lr, tc.decay_every, tc.decay_factor);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order.begin(), order.end());
    double abs_err = 0, l_total = 0, l_rank = 0, l_reg = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      const auto scale = static_cast<Real>(1.0 / static_cast<double>(end - start));
      for (std::size_t k = start; k < end; ++k) {
        const synthetic::Record& r = *train_set[order[k]];
        const bool flip = tc.hflip && augment_rng.below(2) == 1;
        Tape::current().reset();
        try {
          Prediction p = model.forward(flip ? flip_horizontal(r.image) : r.image,
                                       GenderCode(r.gender));
          LossTerms loss = total_loss(p, r.age, model);
          if (!std::isfinite(loss.values.total))
            throw NumericError("loss is not finite");
          backward(mul_scalar(loss.total, scale));
          abs_err += std::abs(p.y_joint - r.age);
          l_total += loss.values.total;
          l_rank += loss.values.rank;
          l_reg += loss.values.regression;
        } catch (const NumericError& e) {
          Tape::current().reset();
          throw NumericError("epoch " + std::to_string(epoch) + ", sample " + r.id + ": " +
                             e.what());
        }
      }
      sgd_step(model.params(), m.lr);
      for (const auto& [name, p] : model.params().entries())
        for (Real v : p.data())
          if (!std::isfinite(v))
            throw NumericError("epoch " + std::to_string(epoch) + ": parameter " + name +
                               " became non-finite");
    }
    const auto count = static_cast<double>(order.size());
    m.train_mae = abs_err / count;
    m.loss_total = l_total / count;
    m.loss_rank = l_rank / count;
    m.loss_reg = l_reg / count;
    const EvalResult ev = evaluate(model, eval_set, tc.hit_iou, eval_threads);
    m.eval_mae = ev.mae;
    m.hit_rate = ev.hit_rate;
    if (m.eval_mae < best) {
      best = m.eval_mae;
      result.best_epoch = epoch;
      result.best_params = model.params().clone();
    }
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  if (result.history.empty()) result.best_params = model.params().clone();
  return result;
}

}  // namespace prs
