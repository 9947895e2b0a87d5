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

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prs/ops.hpp"

namespace prs {
inline namespace PRS_REAL_ABI {
namespace gradcheck {

namespace {

Tensor uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (Real& v : t.mutable_data()) v = static_cast<Real>(rng.uniform(lo, hi));
  return t;
}

// Values bounded away from zero, for ops with a kink there.
Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (Real& v : t.mutable_data()) {
    const double m = rng.uniform(0.1, 1.0);
    v = static_cast<Real>(rng.below(2) == 0 ? -m : m);
  }
  return t;
}

// Distinct values spaced 0.05 apart in shuffled order, so no max-pool window
// has a near tie.
Tensor spaced(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<std::size_t> order(t.numel());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  auto v = t.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<Real>(0.05 * static_cast<double>(order[i]) - 1.0);
  return t;
}

// Fixed random projection to a scalar so every output element matters.
Tensor project(const Tensor& out) {
  Rng rng(0x9e3779b97f4a7c15ULL ^ out.numel());
  Tensor w = uniform(out.shape(), rng, -1.0, 1.0);
  return sum(mul(out, w));
}

double eval_loss(const GradcheckCase& c, const std::vector<Tensor>& inputs) {
  NoGradGuard guard;
  return static_cast<double>(c.loss(inputs).item());
}

}  // namespace

double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                      double floor) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
}

GradcheckOutcome run_gradcheck(const GradcheckCase& c, std::size_t seeds, double step,
                               double tolerance, double floor) {
  GradcheckOutcome out;
  out.name = c.name;
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    Rng rng(derive_seed(seed, c.name));
    std::vector<Tensor> inputs = c.make_inputs(rng);
    for (Tensor& t : inputs) t.set_requires_grad(true);
    Tape::current().reset();
    backward(c.loss(inputs));
    bool ok = true;
    for (Tensor& t : inputs) {
      std::vector<double> analytic(t.grad().begin(), t.grad().end());
      std::vector<double> numeric(t.numel());
      auto v = t.mutable_data();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Real saved = v[i];
        v[i] = static_cast<Real>(saved + step);
        const double up = eval_loss(c, inputs);
        v[i] = static_cast<Real>(saved - step);
        const double down = eval_loss(c, inputs);
        v[i] = saved;
        numeric[i] = (up - down) / (2 * step);
      }
      const double err = relative_error(analytic, numeric, floor);
      out.worst_rel_error = std::max(out.worst_rel_error, err);
      if (!(err <= tolerance)) ok = false;
    }
    ++out.instances;
    if (!ok) ++out.failures;
  }
  return out;
}

std::vector<GradcheckCase> engine_cases() {
  std::vector<GradcheckCase> cases;
  auto unary = [&](std::string name, auto op, auto gen) {
    cases.push_back({std::move(name),
                     [gen](Rng& rng) { return std::vector<Tensor>{gen(Shape{3, 5}, rng)}; },
                     [op](const std::vector<Tensor>& in) { return project(op(in[0])); }});
  };
  auto plain = [](Shape s, Rng& rng) { return uniform(std::move(s), rng, -2.0, 2.0); };
  auto kinked = [](Shape s, Rng& rng) { return away_from_zero(std::move(s), rng); };
  unary("sigmoid", [](const Tensor& x) { return sigmoid(x); }, plain);
  unary("relu", [](const Tensor& x) { return relu(x); }, kinked);
  unary("abs", [](const Tensor& x) { return abs(x); }, kinked);
  unary("square", [](const Tensor& x) { return square(x); }, plain);
  unary("add_scalar", [](const Tensor& x) { return add_scalar(x, Real(0.7)); }, plain);
  unary("mul_scalar", [](const Tensor& x) { return mul_scalar(x, Real(-1.3)); }, plain);
  unary("sum", [](const Tensor& x) { return mul_scalar(sum(x), Real(0.5)); }, plain);
  unary("mean", [](const Tensor& x) { return square(mean(x)); }, plain);
  unary("reshape", [](const Tensor& x) { return reshape(x, {5, 3}); }, plain);

  auto binary = [&](std::string name, auto op, Shape sa, Shape sb) {
    cases.push_back({std::move(name),
                     [sa, sb](Rng& rng) {
                       return std::vector<Tensor>{uniform(sa, rng), uniform(sb, rng)};
                     },
                     [op](const std::vector<Tensor>& in) { return project(op(in[0], in[1])); }});
  };
  auto f_add = [](const Tensor& a, const Tensor& b) { return add(a, b); };
  auto f_sub = [](const Tensor& a, const Tensor& b) { return sub(a, b); };
  auto f_mul = [](const Tensor& a, const Tensor& b) { return mul(a, b); };
  binary("add", f_add, {2, 4}, {2, 4});
  binary("sub", f_sub, {2, 4}, {2, 4});
  binary("mul", f_mul, {2, 4}, {2, 4});
  binary("add_broadcast", f_add, {1}, {2, 4});
  binary("mul_broadcast", f_mul, {2, 4}, {1});
  binary("sub_broadcast", f_sub, {1}, {3});

  cases.push_back({"linear",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform({2, 5}, rng), uniform({5, 3}, rng),
                                                uniform({3}, rng)};
                   },
                   [](const std::vector<Tensor>& in) {
                     return project(linear(in[0], in[1], in[2]));
                   }});

  struct ConvCase {
    const char* name;
    std::size_t c_in, c_out, k, stride, pad, h, w;
  };
  for (const ConvCase cc : {ConvCase{"conv2d_3x3_s1_p1", 2, 3, 3, 1, 1, 5, 6},
                            ConvCase{"conv2d_3x3_s2_p1", 2, 2, 3, 2, 1, 7, 6},
                            ConvCase{"conv2d_1x1", 3, 2, 1, 1, 0, 4, 4},
                            ConvCase{"conv2d_2x2_s2_p0", 1, 2, 2, 2, 0, 6, 5}}) {
    cases.push_back({cc.name,
                     [cc](Rng& rng) {
                       return std::vector<Tensor>{uniform({1, cc.c_in, cc.h, cc.w}, rng),
                                                  uniform({cc.c_out, cc.c_in, cc.k, cc.k}, rng),
                                                  uniform({cc.c_out}, rng)};
                     },
                     [cc](const std::vector<Tensor>& in) {
                       return project(conv2d(in[0], in[1], in[2], cc.stride, cc.pad));
                     }});
  }

  cases.push_back({"concat_axis1",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform({2, 3}, rng), uniform({2, 2}, rng),
                                                uniform({2, 1}, rng)};
                   },
                   [](const std::vector<Tensor>& in) {
                     return project(concat({in[0], in[1], in[2]}, 1));
                   }});
  cases.push_back({"concat_axis0",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform({1, 3}, rng), uniform({2, 3}, rng)};
                   },
                   [](const std::vector<Tensor>& in) { return project(concat({in[0], in[1]}, 0)); }});
  cases.push_back({"gather_repeats",
                   [](Rng& rng) { return std::vector<Tensor>{uniform({6}, rng)}; },
                   [](const std::vector<Tensor>& in) {
                     const std::vector<std::size_t> idx{4, 0, 4, 2, 5, 4};
                     return project(gather(in[0], idx));
                   }});
  cases.push_back({"max_pool2d",
                   [](Rng& rng) { return std::vector<Tensor>{spaced({1, 2, 6, 6}, rng)}; },
                   [](const std::vector<Tensor>& in) { return project(max_pool2d(in[0], 2, 2)); }});
  cases.push_back({"spatial_mean",
                   [](Rng& rng) { return std::vector<Tensor>{uniform({1, 3, 4, 5}, rng)}; },
                   [](const std::vector<Tensor>& in) { return project(spatial_mean(in[0])); }});
  cases.push_back({"resize_bilinear",
                   [](Rng& rng) { return std::vector<Tensor>{uniform({1, 2, 5, 4}, rng)}; },
                   [](const std::vector<Tensor>& in) {
                     return project(resize_bilinear(in[0], 7, 3));
                   }});
  cases.push_back({"resample_rect",
                   [](Rng& rng) { return std::vector<Tensor>{uniform({1, 1, 8, 8}, rng)}; },
                   [](const std::vector<Tensor>& in) {
                     return project(resample_rect(in[0], PixelRect{1, 2, 7, 6}, 5, 5));
                   }});
  // conv -> gate -> pooled -> linear head, the shape of one relation level.
  cases.push_back({"composite_gate",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform({1, 2, 4, 4}, rng),
                                                uniform({3, 2, 1, 1}, rng),
                                                uniform({3, 2, 1, 1}, rng),
                                                uniform({3, 1}, rng)};
                   },
                   [](const std::vector<Tensor>& in) {
                     const Tensor zb(Shape{3});
                     const Tensor r = conv2d(in[0], in[1], zb, 1, 0);
                     const Tensor t = conv2d(in[0], in[2], zb, 1, 0);
                     const Tensor f = add(mul(t, sigmoid(r)), t);
                     const Tensor y = linear(spatial_mean(f), in[3], Tensor(Shape{1}));
                     return sum(square(add_scalar(y, Real(-0.3))));
                   }});
  return cases;
}

}  // namespace gradcheck
}  // namespace PRS_REAL_ABI

namespace testing {

#ifdef PRS_REAL_DOUBLE
GradcheckSummary run_engine_gradchecks_f64(std::size_t seeds) {
  GradcheckSummary s{"f64", 1e-4, 1e-6, {}};
  const double floor = 1e-8;
#else
GradcheckSummary run_engine_gradchecks_f32(std::size_t seeds) {
  GradcheckSummary s{"f32", 1e-2, 1e-3, {}};
  const double floor = 1e-4;
#endif
  for (const auto& c : PRS_REAL_ABI::gradcheck::engine_cases())
    s.outcomes.push_back(PRS_REAL_ABI::gradcheck::run_gradcheck(c, seeds, s.step, s.tolerance, floor));
  return s;
}

}  // namespace testing
}  // namespace prs
