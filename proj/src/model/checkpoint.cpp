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

#include "prs/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "prs/export.hpp"
#include "prs/prst.hpp"
#include "prs/random.hpp"

namespace prs {

using nlohmann::json;

namespace {

json metrics_to_json(const EpochMetrics& m) {
  json j{{"epoch", m.epoch},           {"lr", m.lr},
         {"train_mae", m.train_mae},   {"eval_mae", m.eval_mae},
         {"loss_total", m.loss_total}, {"loss_rank", m.loss_rank},
         {"loss_reg", m.loss_reg}};
  j["hit_rate"] = m.hit_rate ? json(*m.hit_rate) : json(nullptr);
  return j;
}

EpochMetrics metrics_from_json(const json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<std::size_t>();
  m.lr = j.at("lr").get<double>();
  m.train_mae = j.at("train_mae").get<double>();
  m.eval_mae = j.at("eval_mae").get<double>();
  m.loss_total = j.at("loss_total").get<double>();
  m.loss_rank = j.at("loss_rank").get<double>();
  m.loss_reg = j.at("loss_reg").get<double>();
  if (!j.at("hit_rate").is_null()) m.hit_rate = j.at("hit_rate").get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Model& model,
                     const RunConfig& cfg, const CheckpointInfo& info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json params = json::array();
  for (const auto& [name, t] : model.params().entries()) {
    write_prst(dir / (name + ".prst"), t);
    params.push_back({{"name", name}, {"shape", t.shape()}});
  }
  json history = json::array();
  for (const EpochMetrics& m : info.history) history.push_back(metrics_to_json(m));
  const json manifest{{"config", config_to_json(cfg)},
                      {"epoch", info.epoch},
                      {"best_epoch", info.best_epoch},
                      {"seed", cfg.seed},
                      {"target_mean", model.target_mean},
                      {"target_std", model.target_std},
                      {"params", params},
                      {"history", history}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream is(manifest_path);
  if (!is) throw CheckpointError("cannot read " + manifest_path.string());
  json j;
  RunConfig cfg;
  try {
    j = json::parse(is);
    cfg = config_from_json(j.at("config"));
  } catch (const std::exception& e) {
    throw CheckpointError(manifest_path.string() + ": " + e.what());
  }
  LoadedCheckpoint out{cfg, Model(cfg.model, derive_seed(cfg.seed, "init")), {}};
  try {
    out.info.epoch = j.at("epoch").get<std::size_t>();
    out.info.best_epoch = j.at("best_epoch").get<std::size_t>();
    for (const json& m : j.at("history")) out.info.history.push_back(metrics_from_json(m));
    out.model.target_mean = j.at("target_mean").get<double>();
    out.model.target_std = j.at("target_std").get<double>();
    const json& params = j.at("params");
    if (params.size() != out.model.params().size())
      throw CheckpointError("checkpoint lists " + std::to_string(params.size()) +
                            " parameters, model has " + std::to_string(out.model.params().size()));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(manifest_path.string() + ": " + e.what());
  }
  ParameterSet loaded;
  for (const auto& [name, t] : out.model.params().entries()) {
    const auto file = dir / (name + ".prst");
    Tensor value;
    try {
      value = read_prst(file);
    } catch (const std::exception& e) {
      throw CheckpointError(file.string() + ": " + e.what());
    }
    if (value.shape() != t.shape())
      throw CheckpointError(file.string() + ": shape " + shape_string(value.shape()) +
                            " does not match model " + shape_string(t.shape()));
    loaded.add(name, value);
  }
  out.model.params().assign_from(loaded);
  return out;
}

}  // namespace prs
