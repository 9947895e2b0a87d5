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

// prsnet: dataset generation, training, evaluation and export.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prs/assessment.hpp"
#include "prs/checkpoint.hpp"
#include "prs/config.hpp"
#include "prs/export.hpp"
#include "prs/ops.hpp"
#include "prs/prst.hpp"
#include "prs/synthetic.hpp"

namespace fs = std::filesystem;
using namespace prs;

namespace {

enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kCheckpoint = 5,
  kBadId = 6,
};

int env_threads() {
  const char* v = std::getenv("PRS_THREADS");
  if (v == nullptr) return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    throw ConfigError(std::string("PRS_THREADS must be an integer, got '") + v + "'");
  }
}

void require_empty_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir) && !force)
    throw IoError(dir.string() + " exists and is not empty (use --force to overwrite)");
}

RunConfig load_with_overrides(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

int cmd_gen(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
            bool force) {
  const RunConfig cfg = load_with_overrides(config, seed);
  require_empty_dir(out, force);
  synthetic::generate_dataset(cfg, out, env_threads());
  std::size_t train = 0;
  for (std::size_t i = 0; i < cfg.data.n; ++i)
    train += synthetic::is_train_id(synthetic::sample_id(i), cfg.data.train_fraction) ? 1 : 0;
  std::cout << "wrote " << cfg.data.n << " samples to " << out << " (train=" << train
            << ", eval=" << cfg.data.n - train << ")\n";
  return kOk;
}

int cmd_train(const std::string& config, std::string data, const std::string& out,
              std::optional<std::uint64_t> seed, const std::string& ablation, bool force) {
  RunConfig cfg = load_with_overrides(config, seed);
  if (!ablation.empty()) apply_ablation(cfg.model, ablation);
  if (data.empty()) data = cfg.data.path;
  if (data.empty()) throw ConfigError("no dataset: pass --data or set data.path");
  require_empty_dir(out, force);
  const synthetic::Dataset ds = synthetic::load_dataset(data);
  fs::create_directories(out);
  TrainResult result = train(
      ds, cfg,
      [](const EpochMetrics& m) {
        std::cerr << "epoch " << m.epoch << " lr=" << m.lr << " train_mae=" << m.train_mae
                  << " eval_mae=" << m.eval_mae << " loss=" << m.loss_total
                  << " rank=" << m.loss_rank << " reg=" << m.loss_reg;
        if (m.hit_rate) std::cerr << " hit_rate=" << *m.hit_rate;
        std::cerr << '\n';
      },
      env_threads());
  const CheckpointInfo info{result.history.empty() ? 0 : result.history.back().epoch,
                            result.best_epoch, result.history};
  save_checkpoint(fs::path(out) / "checkpoint", result.model, cfg, info);
  // Reuses the final model's storage, so this goes after the final save.
  result.model.params().assign_from(result.best_params);
  CheckpointInfo best_info = info;
  best_info.epoch = result.best_epoch;
  save_checkpoint(fs::path(out) / "best", result.model, cfg, best_info);
  write_metrics_csv(fs::path(out) / "metrics.csv", result.history);
  const double mae = result.history.empty() ? 0.0 : result.history.back().eval_mae;
  std::cout << "eval_mae=" << format_real(mae) << '\n';
  return kOk;
}

std::vector<const synthetic::Record*> pick_split(const synthetic::Dataset& ds,
                                                 const std::string& split) {
  if (split == "eval") return ds.split(false);
  if (split == "train") return ds.split(true);
  if (split == "all") {
    std::vector<const synthetic::Record*> all;
    for (const auto& r : ds.records) all.push_back(&r);
    return all;
  }
  throw ConfigError("--split must be eval, train or all");
}

int cmd_eval(const std::string& checkpoint, const std::string& data, std::string out,
             const std::string& split) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  const synthetic::Dataset ds = synthetic::load_dataset(data);
  const auto records = pick_split(ds, split);
  const EvalResult ev = evaluate(ck.model, records, ck.config.training.hit_iou, env_threads());
  if (out.empty()) out = (fs::path(checkpoint) / "eval").string();
  fs::create_directories(out);
  write_predictions_csv(fs::path(out) / "predictions.csv", ev.samples);
  write_selection_csv(fs::path(out) / "selection.csv", ev.samples);
  std::cout << "eval_mae=" << format_real(ev.mae)
            << " hit_rate=" << (ev.hit_rate ? format_real(*ev.hit_rate) : "") << '\n';
  return kOk;
}

int cmd_export_maps(const std::string& checkpoint, const std::string& data, std::string out,
                    const std::vector<std::string>& ids) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  if (ck.config.model.no_relation)
    throw ConfigError("checkpoint was trained without the relation gate; no maps to export");
  const synthetic::Dataset ds = synthetic::load_dataset(data);
  std::vector<const synthetic::Record*> records;
  for (const std::string& id : ids) {
    const synthetic::Record* r = ds.find(id);
    if (r == nullptr) throw BadIdError("id '" + id + "' is not in " + data + "/manifest.csv");
    records.push_back(r);
  }
  if (out.empty()) out = (fs::path(checkpoint) / "maps").string();
  fs::create_directories(out);
  NoGradGuard guard;
  const std::size_t size = ck.config.model.image_size;
  for (const synthetic::Record* r : records) {
    Prediction p = ck.model.forward(r->image, GenderCode(r->gender));
    total_loss(p, r->age, ck.model);
    for (std::size_t l = 0; l < p.pyramid.levels.size(); ++l) {
      // Channel mean of sigmoid(R), upsampled to the input size.
      const Tensor gate = p.pyramid.relation_map(l);
      const std::size_t c = gate.dim(1), h = gate.dim(2), w = gate.dim(3);
      Tensor avg(Shape{1, 1, h, w});
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h * w; ++i)
          avg.mutable_data()[i] += gate.data()[ch * h * w + i] / static_cast<Real>(c);
      write_prst(fs::path(out) / (r->id + "_relmap_L" + std::to_string(l) + ".prst"),
                 resize_bilinear(avg, size, size));
    }
    std::string csv = std::string(kSelectionHeader) + "\n";
    append_selection_rows(csv, r->id, p.parts);
    write_text(fs::path(out) / (r->id + "_selection.csv"), csv);
  }
  std::cout << "exported " << records.size() << " images to " << out << '\n';
  return kOk;
}

int cmd_inspect_anchors(const std::string& config, const std::string& out) {
  const RunConfig cfg = load_config(config);
  const AnchorSet set =
      generate_anchors(cfg.model.image_size, cfg.model.image_size, cfg.model.anchors);
  if (set.excluded > 0)
    std::cerr << "warning: " << set.excluded << " anchors collapsed to zero area\n";
  if (out.empty()) {
    const fs::path tmp = fs::temp_directory_path() / "prsnet_anchors.csv";
    write_anchor_csv(tmp, set);
    std::ifstream is(tmp);
    std::cout << is.rdbuf();
    fs::remove(tmp);
  } else {
    write_anchor_csv(out, set);
    std::cout << "wrote " << set.anchors.size() << " anchors to " << out << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prsnet: part relation and selection network on synthetic data"};
  app.require_subcommand(1);

  std::string config, out, data, checkpoint, ablation, split = "eval", ids_arg;
  std::optional<std::uint64_t> seed;
  bool force = false;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config, "run config (JSON)")->required();
  gen->add_option("--out", out, "dataset directory")->required();
  gen->add_option("--seed", seed, "override the config seed");
  gen->add_flag("--force", force, "write into a non-empty directory");

  auto* trn = app.add_subcommand("train", "train a model");
  trn->add_option("--config", config, "run config (JSON)")->required();
  trn->add_option("--data", data, "dataset directory (defaults to data.path)");
  trn->add_option("--out", out, "output directory")->required();
  trn->add_option("--seed", seed, "override the config seed");
  trn->add_option("--ablation", ablation, "full | no_relation | no_selection | baseline");
  trn->add_flag("--force", force, "write into a non-empty directory");

  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint");
  evl->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  evl->add_option("--data", data, "dataset directory")->required();
  evl->add_option("--out", out, "report directory (default <checkpoint>/eval)");
  evl->add_option("--split", split, "eval | train | all");

  auto* exp = app.add_subcommand("export-maps", "export relation maps and selections");
  exp->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  exp->add_option("--data", data, "dataset directory")->required();
  exp->add_option("--ids", ids_arg, "comma-separated sample ids")->required();
  exp->add_option("--out", out, "export directory (default <checkpoint>/maps)");

  auto* ins = app.add_subcommand("inspect-anchors", "dump the anchor set as CSV");
  ins->add_option("--config", config, "run config (JSON)")->required();
  ins->add_option("--out", out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen(config, out, seed, force);
    if (*trn) return cmd_train(config, data, out, seed, ablation, force);
    if (*evl) return cmd_eval(checkpoint, data, out, split);
    if (*exp) {
      std::vector<std::string> ids;
      std::stringstream ss(ids_arg);
      for (std::string id; std::getline(ss, id, ',');)
        if (!id.empty()) ids.push_back(id);
      return cmd_export_maps(checkpoint, data, out, ids);
    }
    if (*ins) return cmd_inspect_anchors(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kCheckpoint;
  } catch (const BadIdError& e) {
    std::cerr << "bad id: " << e.what() << '\n';
    return kBadId;
  } catch (const NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ShapeError& e) {
    std::cerr << "shape mismatch: " << e.what() << '\n';
    return *evl || *exp ? kCheckpoint : kUnexpected;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}
