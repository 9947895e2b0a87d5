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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "prs/config.hpp"
#include "prs/synthetic.hpp"

namespace prs::synthetic {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
}

// Statistic of a side x side window of a 1 x H x W image.
double window_statistic(const Tensor& image, std::size_t x, std::size_t y, std::size_t side) {
  const std::size_t w = image.dim(image.rank() - 1);
  std::vector<double> region(side * side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      region[r * side + c] = image.data()[(y + r) * w + x + c];
  return pattern_statistic(region, side);
}

TEST(Sample, SameSeedIsBitIdentical) {
  const DataConfig cfg;
  const Sample a = generate_sample(42, cfg), b = generate_sample(42, cfg);
  EXPECT_EQ(a.age, b.age);
  EXPECT_EQ(a.informative_box, b.informative_box);
  EXPECT_EQ(std::memcmp(a.image.data().data(), b.image.data().data(), a.image.numel() * sizeof(Real)),
            0);
  const Sample c = generate_sample(43, cfg);
  EXPECT_NE(a.age, c.age);
}

TEST(Sample, RangesAndPixelBounds) {
  const DataConfig cfg;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const Sample x = generate_sample(s, cfg);
    EXPECT_GE(x.age, cfg.min_age);
    EXPECT_LE(x.age, cfg.max_age);
    EXPECT_TRUE(x.gender == 0 || x.gender == 1);
    const Box& b = x.informative_box;
    EXPECT_GE(b.width(), static_cast<double>(cfg.box_min));
    EXPECT_LE(b.width(), static_cast<double>(cfg.box_max));
    EXPECT_EQ(b.width(), b.height());
    EXPECT_GE(b.x1, 0);
    EXPECT_LE(b.x2, 64);
    EXPECT_LE(b.y2, 64);
    for (Real v : x.image.data()) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 1);
    }
  }
}

TEST(Sample, BoxThatDoesNotFitIsConfigError) {
  DataConfig cfg;
  cfg.box_max = 80;
  EXPECT_THROW(generate_sample(0, cfg), ConfigError);
}

TEST(Decoder, RecoversAgeFromCleanRegion) {
  for (bool gender_effect : {true, false}) {
    DataConfig cfg;
    cfg.gender_effect = gender_effect;
    for (std::uint64_t s = 0; s < 1000; ++s) {
      Rng rng(s);
      const Layout l = draw_layout(rng, cfg);
      const auto region = render_pattern(l, cfg);
      const auto side = static_cast<std::size_t>(l.box.width());
      const double stat = pattern_statistic(region, side);
      EXPECT_NEAR(stat, fill_fraction(l.age, l.gender, cfg), 1e-12);
      EXPECT_NEAR(decode_age(stat, l.gender, cfg), l.age, 1e-6);
    }
  }
}

TEST(Decoder, GenderOffsetShiftsTheStatistic) {
  DataConfig cfg;
  EXPECT_NEAR(fill_fraction(50, 1, cfg) - fill_fraction(50, 0, cfg), cfg.gender_offset, 1e-15);
  cfg.gender_effect = false;
  EXPECT_EQ(fill_fraction(50, 1, cfg), fill_fraction(50, 0, cfg));
}

TEST(Information, RegionIsInformativeBackgroundIsNot) {
  const DataConfig cfg;
  std::vector<double> stat, age, bg_stat, bg_age;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Sample x = generate_sample(s, cfg);
    const Box& b = x.informative_box;
    // Gender removed so the affine fit is in the fill fraction alone.
    const double st = window_statistic(x.image, static_cast<std::size_t>(b.x1),
                                       static_cast<std::size_t>(b.y1),
                                       static_cast<std::size_t>(b.width())) -
                      (x.gender == 1 ? cfg.gender_offset : 0.0);
    stat.push_back(st);
    age.push_back(x.age);
    // Fixed 16 x 16 corner window, only where it misses the box.
    if (b.x1 >= 16 || b.y1 >= 16) {
      bg_stat.push_back(window_statistic(x.image, 0, 0, 16));
      bg_age.push_back(x.age);
    }
  }
  EXPECT_GT(r_squared(stat, age), 0.99);
  ASSERT_GT(bg_stat.size(), 500u);
  EXPECT_LT(r_squared(bg_stat, bg_age), 0.05);
}

TEST(Placement, CentresCoverAllQuadrants) {
  const DataConfig cfg;
  double counts[4] = {0, 0, 0, 0};
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(s);
    const Layout l = draw_layout(rng, cfg);
    const double cx = (l.box.x1 + l.box.x2) / 2, cy = (l.box.y1 + l.box.y2) / 2;
    counts[(cx >= 32 ? 1 : 0) + (cy >= 32 ? 2 : 0)] += 1;
  }
  double chi2 = 0;
  for (double c : counts) {
    EXPECT_GT(c, 0);
    chi2 += (c - 250) * (c - 250) / 250;
  }
  EXPECT_LT(chi2, 16.27);  // 3 dof, p = 0.001
}

TEST(Split, FractionWithinTwoPercent) {
  std::size_t train = 0;
  for (std::size_t i = 0; i < 1000; ++i) train += is_train_id(sample_id(i), 0.8) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(train) / 1000.0, 0.8, 0.02);
  EXPECT_EQ(sample_id(7), "s000007");
}

TEST(Dataset, WriteReadRegenerate) {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.data.n = 100;
  const fs::path a = fs::temp_directory_path() / "prs_synthetic_a";
  const fs::path b = fs::temp_directory_path() / "prs_synthetic_b";
  fs::remove_all(a);
  fs::remove_all(b);
  generate_dataset(cfg, a, 1);
  generate_dataset(cfg, b, 3);

  std::ifstream manifest(a / "manifest.csv");
  std::string line;
  std::getline(manifest, line);
  EXPECT_EQ(line, "id,age,gender,x1,y1,x2,y2,seed");
  std::set<std::string> ids;
  std::size_t rows = 0;
  while (std::getline(manifest, line)) {
    ++rows;
    ids.insert(line.substr(0, line.find(',')));
  }
  EXPECT_EQ(rows, 100u);
  EXPECT_EQ(ids.size(), 100u);

  for (const char* f : {"manifest.csv", "config.json", "images/s000000.prst",
                        "images/s000099.prst"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;

  const Dataset loaded = load_dataset(a);
  const Dataset memory = generate_in_memory(cfg);
  ASSERT_EQ(loaded.records.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) {
    const Record& x = loaded.records[i];
    const Record& y = memory.records[i];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.age, y.age);
    EXPECT_EQ(x.box, y.box);
    EXPECT_EQ(x.image.shape(), (Shape{1, 1, 64, 64}));
    EXPECT_EQ(std::memcmp(x.image.data().data(), y.image.data().data(),
                          x.image.numel() * sizeof(Real)),
              0);
  }
  EXPECT_NE(loaded.find("s000042"), nullptr);
  EXPECT_EQ(loaded.find("nope"), nullptr);
  EXPECT_EQ(loaded.split(true).size() + loaded.split(false).size(), 100u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Dataset, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/prs"), IoError);
}

}  // namespace
}  // namespace prs::synthetic
