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

#include "prs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include "prs/prst.hpp"
#include "prs/random.hpp"

namespace prs::synthetic {

namespace {

constexpr double kPatternIntensity = 1.0;
constexpr std::size_t kBandRows = 4;

// Filled disc or square of random intensity; clutter ignores the age.
void draw_blob(std::vector<double>& img, std::size_t size, Rng& rng) {
  const double cx = rng.uniform(0, static_cast<double>(size));
  const double cy = rng.uniform(0, static_cast<double>(size));
  const double radius = rng.uniform(2.0, 7.0);
  const double value = rng.uniform(0.3, 1.0);
  const bool disc = rng.below(2) == 0;
  const auto lo = [&](double c) {
    return static_cast<std::size_t>(std::max(0.0, std::floor(c - radius)));
  };
  const auto hi = [&](double c) {
    return static_cast<std::size_t>(
        std::min(static_cast<double>(size), std::ceil(c + radius)));
  };
  for (std::size_t y = lo(cy); y < hi(cy); ++y)
    for (std::size_t x = lo(cx); x < hi(cx); ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      const bool inside = disc ? dx * dx + dy * dy <= radius * radius
                               : std::abs(dx) <= radius * 0.8 && std::abs(dy) <= radius * 0.8;
      if (inside) img[y * size + x] = value;
    }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Layout draw_layout(Rng& rng, const DataConfig& cfg) {
  Layout l;
  l.age = rng.uniform(cfg.min_age, cfg.max_age);
  l.gender = static_cast<int>(rng.below(2));
  const std::size_t side = cfg.box_min + rng.below(cfg.box_max - cfg.box_min + 1);
  const std::size_t x = rng.below(cfg.image_size - side + 1);
  const std::size_t y = rng.below(cfg.image_size - side + 1);
  l.box = {static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + side),
           static_cast<double>(y + side)};
  return l;
}

double fill_fraction(double age, int gender, const DataConfig& cfg) {
  double f = kFillAtMinAge + kFillSpan * (age - cfg.min_age) / (cfg.max_age - cfg.min_age);
  if (cfg.gender_effect && gender == 1) f += cfg.gender_offset;
  return f;
}

std::vector<double> render_pattern(const Layout& layout, const DataConfig& cfg) {
  const auto side = static_cast<std::size_t>(layout.box.width());
  const std::size_t inner = side - 2;
  std::vector<double> region(side * side, 0.0);
  for (std::size_t i = 0; i < side; ++i) {
    region[i] = region[(side - 1) * side + i] = kPatternIntensity;
    region[i * side] = region[i * side + side - 1] = kPatternIntensity;
  }
  // Horizontal bands of kBandRows rows, each filled from its bottom row up to
  // the fill fraction. Rows above the last whole band stay empty. Any crop a
  // few bands tall sees the same area fraction as the whole box.
  const double rows = fill_fraction(layout.age, layout.gender, cfg) * kBandRows;
  const auto full = static_cast<std::size_t>(std::floor(rows));
  const double partial = rows - static_cast<double>(full);
  const std::size_t banded = inner / kBandRows * kBandRows;
  for (std::size_t k = 0; k < banded; ++k) {
    const std::size_t from_bottom = k % kBandRows;
    double v = 0.0;
    if (from_bottom < full) v = kPatternIntensity;
    else if (from_bottom == full) v = partial * kPatternIntensity;
    const std::size_t r = inner - 1 - k;
    for (std::size_t c = 0; c < inner; ++c) region[(r + 1) * side + c + 1] = v;
  }
  return region;
}

double pattern_statistic(std::span<const double> region, std::size_t side) {
  const std::size_t inner = side - 2;
  const std::size_t banded = inner / kBandRows * kBandRows;
  double s = 0;
  for (std::size_t r = side - 1 - banded; r + 1 < side; ++r)
    for (std::size_t c = 1; c + 1 < side; ++c) s += region[r * side + c];
  return s / static_cast<double>(banded * inner) / kPatternIntensity;
}

double decode_age(double statistic, int gender, const DataConfig& cfg) {
  double f = statistic;
  if (cfg.gender_effect && gender == 1) f -= cfg.gender_offset;
  return cfg.min_age + (f - kFillAtMinAge) / kFillSpan * (cfg.max_age - cfg.min_age);
}

Sample generate_sample(std::uint64_t seed, const DataConfig& cfg) {
  if (cfg.box_max > cfg.image_size || cfg.box_min < 6 || cfg.box_min > cfg.box_max)
    throw ConfigError("informative box size range does not fit the image");
  Rng rng(seed);
  const Layout layout = draw_layout(rng, cfg);
  const std::size_t size = cfg.image_size;
  std::vector<double> img(size * size);
  for (double& v : img) v = rng.uniform(0.0, 0.15);
  for (std::size_t i = 0; i < cfg.clutter_blobs; ++i) draw_blob(img, size, rng);

  const auto side = static_cast<std::size_t>(layout.box.width());
  const auto bx = static_cast<std::size_t>(layout.box.x1);
  const auto by = static_cast<std::size_t>(layout.box.y1);
  const std::vector<double> region = render_pattern(layout, cfg);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) img[(by + r) * size + bx + c] = region[r * side + c];

  Sample s;
  s.image = Tensor(Shape{1, size, size});
  auto out = s.image.mutable_data();
  for (std::size_t i = 0; i < img.size(); ++i)
    out[i] = static_cast<Real>(std::clamp(img[i] + cfg.noise_std * rng.normal(), 0.0, 1.0));
  s.age = layout.age;
  s.gender = layout.gender;
  s.informative_box = layout.box;
  return s;
}

std::uint64_t sample_seed(std::uint64_t dataset_seed, std::size_t index) {
  return derive_seed(derive_seed(dataset_seed, "data"), static_cast<std::uint64_t>(index));
}

std::string sample_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06zu", index);
  return buf;
}

bool is_train_id(const std::string& id, double train_fraction) {
  return static_cast<double>(mix64(fnv1a64(id)) % 10000) < train_fraction * 10000.0;
}

std::vector<const Record*> Dataset::split(bool train) const {
  std::vector<const Record*> out;
  for (const Record& r : records)
    if (is_train_id(r.id, train_fraction) == train) out.push_back(&r);
  return out;
}

const Record* Dataset::find(const std::string& id) const {
  for (const Record& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

Record generate_record(const RunConfig& cfg, std::size_t index) {
  Sample s = generate_sample(sample_seed(cfg.seed, index), cfg.data);
  Record r;
  r.id = sample_id(index);
  r.age = s.age;
  r.gender = s.gender;
  r.box = s.informative_box;
  r.seed = sample_seed(cfg.seed, index);
  const Shape& sh = s.image.shape();
  r.image = Tensor(Shape{1, sh[0], sh[1], sh[2]},
                   std::vector<Real>(s.image.data().begin(), s.image.data().end()));
  return r;
}

Dataset generate_in_memory(const RunConfig& cfg, int threads) {
  Dataset ds;
  ds.train_fraction = cfg.data.train_fraction;
  ds.records.resize(cfg.data.n);
  const auto n = static_cast<std::ptrdiff_t>(cfg.data.n);
  std::exception_ptr error;
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      ds.records[static_cast<std::size_t>(i)] = generate_record(cfg, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return ds;
}

void generate_dataset(const RunConfig& cfg, const std::filesystem::path& out_dir, int threads) {
  namespace fs = std::filesystem;
  const DataConfig& d = cfg.data;
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "images").string() + ": " + ec.message());

  const auto n = static_cast<std::ptrdiff_t>(d.n);
  std::vector<Sample> samples(d.n);
  std::string error;
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      samples[idx] = generate_sample(sample_seed(cfg.seed, idx), d);
      write_prst(out_dir / "images" / (sample_id(idx) + ".prst"), samples[idx].image);
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw IoError(error);

  std::ofstream manifest(out_dir / "manifest.csv", std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (out_dir / "manifest.csv").string());
  manifest << "id,age,gender,x1,y1,x2,y2,seed\n";
  for (std::size_t i = 0; i < d.n; ++i) {
    const Sample& s = samples[i];
    manifest << sample_id(i) << ',' << format_double(s.age) << ',' << s.gender << ','
             << s.informative_box.x1 << ',' << s.informative_box.y1 << ','
             << s.informative_box.x2 << ',' << s.informative_box.y2 << ','
             << sample_seed(cfg.seed, i) << '\n';
  }
  if (!manifest) throw IoError("failed writing " + (out_dir / "manifest.csv").string());

  std::ofstream config(out_dir / "config.json", std::ios::trunc);
  if (!config) throw IoError("cannot write " + (out_dir / "config.json").string());
  config << config_to_json(cfg).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.csv";
  std::ifstream is(manifest_path);
  if (!is) throw IoError("cannot read " + manifest_path.string());
  Dataset ds;
  const auto config_path = dir / "config.json";
  if (std::filesystem::exists(config_path))
    ds.train_fraction = load_config(config_path).data.train_fraction;
  std::string line;
  std::getline(is, line);
  if (line != "id,age,gender,x1,y1,x2,y2,seed")
    throw IoError(manifest_path.string() + ": unexpected header '" + line + "'");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8)
      throw IoError(manifest_path.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    Record r;
    try {
      r.id = f[0];
      r.age = std::stod(f[1]);
      r.gender = std::stoi(f[2]);
      r.box = {std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
      r.seed = std::stoull(f[7]);
    } catch (const std::exception&) {
      throw IoError(manifest_path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    Tensor img = read_prst(dir / "images" / (r.id + ".prst"));
    if (img.rank() != 3) throw IoError(r.id + ".prst: expected a 1 x H x W image");
    r.image = Tensor(Shape{1, img.dim(0), img.dim(1), img.dim(2)},
                     std::vector<Real>(img.data().begin(), img.data().end()));
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw IoError(manifest_path.string() + ": no samples");
  return ds;
}

}  // namespace prs::synthetic
