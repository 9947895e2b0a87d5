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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "gradcheck.hpp"
#include "prs/init.hpp"
#include "prs/kernels.hpp"
#include "prs/ops.hpp"
#include "prs/prst.hpp"
#include "prs/random.hpp"
#include "prs/tensor.hpp"

namespace prs {
namespace {

#ifdef PRS_REAL_DOUBLE
constexpr double kTol = 1e-12;
#else
constexpr double kTol = 1e-5;
#endif

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  for (Real& v : t.mutable_data()) v = static_cast<Real>(rng.uniform(lo, hi));
  return t;
}

Tensor leaf(Shape shape, std::vector<Real> v) {
  Tensor t(std::move(shape), std::move(v));
  t.set_requires_grad(true);
  return t;
}

// Six nested loops, written independently of the kernels.
std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t s,
                               std::size_t p) {
  const std::size_t c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * p - k) / s + 1, ow = (wd + 2 * p - k) / s + 1;
  std::vector<double> out(o * oh * ow);
  for (std::size_t oc = 0; oc < o; ++oc)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = b.data()[oc];
        for (std::size_t ic = 0; ic < c; ++ic)
          for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v) {
              const long y = static_cast<long>(i * s + u) - static_cast<long>(p);
              const long xx = static_cast<long>(j * s + v) - static_cast<long>(p);
              if (y < 0 || xx < 0 || y >= static_cast<long>(h) || xx >= static_cast<long>(wd))
                continue;
              acc += static_cast<double>(x.data()[(ic * h + y) * wd + xx]) *
                     w.data()[((oc * c + ic) * k + u) * k + v];
            }
        out[(oc * oh + i) * ow + j] = acc;
      }
  return out;
}

TEST(Tensor, ZeroExtentIsRejected) {
  EXPECT_THROW(Tensor(Shape{2, 0}), ShapeError);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<Real>(3)), ShapeError);
}

TEST(Tensor, CopiesShareStorageCloneDoesNot) {
  Tensor a(Shape{2}, Real(1));
  Tensor b = a;
  Tensor c = a.clone();
  b.mutable_data()[0] = 5;
  EXPECT_EQ(a.data()[0], 5);
  EXPECT_EQ(c.data()[0], 1);
}

TEST(Conv2d, IdentityKernel) {
  Rng rng(1);
  Tensor x = random_tensor({1, 1, 4, 5}, rng);
  Tensor y = conv2d(x, Tensor({1, 1, 1, 1}, Real(1)), Tensor({1}), 1, 0);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv2d, ZeroWeightGivesBias) {
  Rng rng(2);
  Tensor y = conv2d(random_tensor({1, 2, 5, 5}, rng), Tensor({3, 2, 3, 3}),
                    Tensor({3}, {Real(0.5), Real(-1), Real(2)}), 2, 1);
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t i = 0; i < 9; ++i)
      EXPECT_EQ(y.data()[o * 9 + i], (std::array<Real, 3>{Real(0.5), Real(-1), Real(2)}[o]));
}

TEST(Conv2d, MatchesNaiveLoopsOnSpecCase) {
  Rng rng(3);
  Tensor x = random_tensor({1, 3, 5, 5}, rng), w = random_tensor({2, 3, 3, 3}, rng),
         b = random_tensor({2}, rng);
  Tensor y = conv2d(x, w, b, 1, 1);
  const auto ref = naive_conv(x, w, b, 1, 1);
  ASSERT_EQ(y.numel(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.data()[i], ref[i], 1e-6 + kTol);
}

TEST(Conv2d, OutputShapeFormulaSweep) {
  Rng rng(4);
  for (std::size_t h = 1; h <= 16; ++h)
    for (std::size_t k = 1; k <= 5; ++k)
      for (std::size_t s = 1; s <= 3; ++s)
        for (std::size_t p = 0; p <= 2; ++p) {
          if (h + 2 * p < k) {
            EXPECT_THROW(conv2d(Tensor({1, 1, h, h}), Tensor({1, 1, k, k}), Tensor({1}), s, p),
                         ShapeError);
            continue;
          }
          Tensor x = random_tensor({1, 2, h, h + 1}, rng);
          Tensor w = random_tensor({2, 2, k, k}, rng);
          Tensor b = random_tensor({2}, rng);
          Tensor y = conv2d(x, w, b, s, p);
          EXPECT_EQ(y.dim(2), (h + 2 * p - k) / s + 1);
          EXPECT_EQ(y.dim(3), (h + 1 + 2 * p - k) / s + 1);
          const auto ref = naive_conv(x, w, b, s, p);
          for (std::size_t i = 0; i < ref.size(); ++i)
            ASSERT_NEAR(y.data()[i], ref[i], 1e-5) << h << " " << k << " " << s << " " << p;
        }
}

TEST(Conv2d, ChannelMismatchNamesDimension) {
  try {
    conv2d(Tensor({1, 2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}), 1, 1);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
}

TEST(Kernels, ParallelMatchesReference) {
  Rng rng(5);
  kernels::ConvGeometry g{2, 3, 9, 7, 4, 3, 2, 1};
  Tensor x = random_tensor({2, 3, 9, 7}, rng), w = random_tensor({4, 3, 3, 3}, rng),
         b = random_tensor({4}, rng);
  const std::size_t out = g.batch * g.out_channels * g.out_height() * g.out_width();
  std::vector<Real> y(out), y_ref(out), cols(g.batch * g.patch_size() * g.out_height() * g.out_width());
  for (int threads : {1, 3}) {
    kernels::set_num_threads(threads);
    kernels::conv2d_forward(g, x.data().data(), w.data().data(), b.data().data(), y.data(),
                            cols.data());
    kernels::reference::conv2d_forward(g, x.data().data(), w.data().data(), b.data().data(),
                                       y_ref.data());
    for (std::size_t i = 0; i < out; ++i) EXPECT_NEAR(y[i], y_ref[i], 1e-5);

    Tensor dy = random_tensor({out}, rng);
    std::vector<Real> gi(x.numel()), gw(w.numel()), gb(4), gi_ref(x.numel()), gw_ref(w.numel()),
        gb_ref(4);
    kernels::conv2d_backward(g, dy.data().data(), x.data().data(), cols.data(), w.data().data(),
                             gi.data(), gw.data(), gb.data());
    kernels::reference::conv2d_backward_input(g, dy.data().data(), w.data().data(), gi_ref.data());
    kernels::reference::conv2d_backward_weight(g, dy.data().data(), x.data().data(),
                                               gw_ref.data(), gb_ref.data());
    for (std::size_t i = 0; i < gi.size(); ++i) EXPECT_NEAR(gi[i], gi_ref[i], 1e-5);
    for (std::size_t i = 0; i < gw.size(); ++i) EXPECT_NEAR(gw[i], gw_ref[i], 1e-4);
    for (std::size_t i = 0; i < gb.size(); ++i) EXPECT_NEAR(gb[i], gb_ref[i], 1e-4);
  }
  kernels::set_num_threads(1);
}

TEST(Kernels, GemmMatchesReferenceMatmul) {
  Rng rng(6);
  const std::size_t m = 7, n = 5, k = 9;
  Tensor a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng);
  std::vector<Real> c(m * n), ref(m * n);
  kernels::gemm_nn(m, n, k, a.data().data(), b.data().data(), c.data(), false);
  kernels::reference::matmul(m, n, k, a.data().data(), b.data().data(), ref.data());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-5);
}

TEST(Linear, IdentityAndZeroInput) {
  Rng rng(7);
  Tensor x = random_tensor({2, 3}, rng);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.mutable_data()[i * 4] = 1;
  Tensor y = linear(x, eye, Tensor({3}));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
  Tensor b = random_tensor({2}, rng);
  Tensor z = linear(Tensor({3, 4}), random_tensor({4, 2}, rng), b);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(z.data()[r * 2 + j], b.data()[j]);
}

TEST(Linear, MatchesTripleLoop) {
  Rng rng(8);
  Tensor x = random_tensor({4, 3}, rng), w = random_tensor({3, 2}, rng), b = random_tensor({2}, rng);
  Tensor y = linear(x, w, b);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = b.data()[j];
      for (std::size_t k = 0; k < 3; ++k)
        acc += static_cast<double>(x.data()[i * 3 + k]) * w.data()[k * 2 + j];
      EXPECT_NEAR(y.data()[i * 2 + j], acc, 1e-6);
    }
  EXPECT_THROW(linear(x, Tensor({2, 2}), b), ShapeError);
}

TEST(Sigmoid, SpecialValuesAndStability) {
  Tensor x = leaf({5}, {Real(0), Real(50), Real(-50), Real(1000), Real(-1000)});
  Tensor y = sigmoid(x);
  EXPECT_EQ(y.data()[0], Real(0.5));
  EXPECT_NEAR(y.data()[1], 1.0, 1e-9);
  EXPECT_GE(y.data()[2], 0);
  EXPECT_TRUE(std::isfinite(y.data()[3]) && std::isfinite(y.data()[4]));
  backward(sum(y));
  EXPECT_EQ(x.grad()[0], Real(0.25));
}

TEST(Elementwise, SmallCases) {
  Tensor r = relu(Tensor({2}, {Real(-1), Real(2)}));
  EXPECT_EQ(r.data()[0], 0);
  EXPECT_EQ(r.data()[1], 2);
  EXPECT_EQ(mean(Tensor({4}, {1, 2, 3, 4})).item(), Real(2.5));
  Rng rng(9);
  Tensor img = random_tensor({1, 1, 2, 2}, rng);
  Tensor same = resize_bilinear(img, 2, 2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(same.data()[i], img.data()[i]);
  Tensor c = concat({Tensor({2, 3}), Tensor({2, 4})}, 1);
  EXPECT_EQ(c.shape(), (Shape{2, 7}));
  EXPECT_THROW(concat({Tensor({2, 3}), Tensor({2, 4})}, 2), ShapeError);
  EXPECT_THROW(concat({Tensor({2, 3}), Tensor({3, 4})}, 1), ShapeError);
  EXPECT_THROW(add(Tensor({2, 3}), Tensor({3, 2})), ShapeError);
  EXPECT_EQ(add(Tensor({1}, Real(2)), Tensor({3}, Real(1))).data()[2], 3);
}

TEST(Elementwise, MaxPoolPicksWindowMaximum) {
  Tensor x({1, 1, 2, 4}, {1, 5, 2, 0, 3, 4, 7, 6});
  Tensor y = max_pool2d(x, 2, 2);
  EXPECT_EQ(y.data()[0], 5);
  EXPECT_EQ(y.data()[1], 7);
}

TEST(Backward, SquareAtThree) {
  Tensor x = leaf({1}, {3});
  backward(sum(square(x)));
  EXPECT_EQ(x.grad()[0], 6);
}

TEST(Backward, UnusedLeafGetsZero) {
  Tensor x = leaf({2}, {1, 2});
  Tensor unused = leaf({3}, {1, 2, 3});
  backward(sum(x));
  for (Real g : unused.grad()) EXPECT_EQ(g, 0);
}

TEST(Backward, SecondCallIsError) {
  Tensor x = leaf({1}, {3});
  Tensor loss = sum(square(x));
  backward(loss);
  EXPECT_THROW(backward(loss), AutogradError);
}

TEST(Backward, NonScalarLossIsError) {
  Tensor x = leaf({2}, {1, 2});
  EXPECT_THROW(backward(square(x)), AutogradError);
  Tape::current().reset();
}

TEST(Backward, AddDistributesConcatSplits) {
  Tensor a = leaf({2}, {1, 2}), b = leaf({3}, {3, 4, 5});
  Tensor c = concat({a, b}, 0);
  backward(sum(add(c, mul_scalar(c, 2))));
  EXPECT_EQ(a.grad().size() + b.grad().size(), c.numel());
  for (Real g : a.grad()) EXPECT_EQ(g, 3);
  for (Real g : b.grad()) EXPECT_EQ(g, 3);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  Tensor x = leaf({2}, {1, 2});
  Tape::current().reset();
  {
    NoGradGuard guard;
    Tensor y = square(x);
    EXPECT_EQ(Tape::current().size(), 0u);
  }
  Tensor y = square(x);
  EXPECT_EQ(Tape::current().size(), 1u);
  Tape::current().reset();
}

TEST(Backward, SumSigmoidLinearMatchesFiniteDifferences) {
  Rng rng(10);
  gradcheck::GradcheckCase c{
      "sum_sigmoid_linear",
      [](Rng& r) {
        return std::vector<Tensor>{random_tensor({3, 4}, r), random_tensor({4, 2}, r),
                                   random_tensor({2}, r)};
      },
      [](const std::vector<Tensor>& in) { return sum(sigmoid(linear(in[0], in[1], in[2]))); }};
#ifdef PRS_REAL_DOUBLE
  const auto out = gradcheck::run_gradcheck(c, 20, 1e-4, 1e-6, 1e-8);
#else
  const auto out = gradcheck::run_gradcheck(c, 20, 1e-2, 1e-3, 1e-4);
#endif
  EXPECT_EQ(out.failures, 0u) << out.worst_rel_error;
}

TEST(Backward, NonFiniteOutputIsNumericError) {
  Tensor x({1}, {std::numeric_limits<Real>::max()});
  EXPECT_THROW(square(x), NumericError);
}

TEST(Gradcheck, EveryEngineOpAtTwentySeeds) {
#ifdef PRS_REAL_DOUBLE
  const auto summary = testing::run_engine_gradchecks_f64(20);
#else
  const auto summary = testing::run_engine_gradchecks_f32(20);
#endif
  for (const auto& o : summary.outcomes)
    EXPECT_EQ(o.failures, 0u) << o.name << " worst " << o.worst_rel_error;
}

TEST(Determinism, RepeatedOpsAreBitIdentical) {
  Rng r1(11), r2(11);
  Tensor a = random_tensor({1, 2, 9, 9}, r1), b = random_tensor({1, 2, 9, 9}, r2);
  Tensor w = random_tensor({3, 2, 3, 3}, r1), bias = random_tensor({3}, r1);
  Tensor y1 = resize_bilinear(conv2d(a, w, bias, 2, 1), 7, 7);
  Tensor y2 = resize_bilinear(conv2d(b, w, bias, 2, 1), 7, 7);
  EXPECT_EQ(std::memcmp(y1.data().data(), y2.data().data(), y1.numel() * sizeof(Real)), 0);
}

TEST(Init, GlorotBoundsAndSeeding) {
  Rng r1(12), r2(12);
  Tensor w = glorot_uniform({16, 8, 3, 3}, 72, 144, r1);
  Tensor w2 = glorot_uniform({16, 8, 3, 3}, 72, 144, r2);
  const double a = std::sqrt(6.0 / (72 + 144));
  for (std::size_t i = 0; i < w.numel(); ++i) {
    EXPECT_LE(std::abs(w.data()[i]), a);
    EXPECT_EQ(w.data()[i], w2.data()[i]);
  }
  EXPECT_TRUE(w.requires_grad());
}

TEST(Prst, RoundTripIsBitExact) {
  Rng rng(13);
  Tensor t = random_tensor({2, 3, 4}, rng, -1e6, 1e6);
  t.mutable_data()[0] = std::numeric_limits<Real>::denorm_min();
  const auto bytes = encode_prst(t);
  ASSERT_EQ(std::memcmp(bytes.data(), "PRST", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version, little endian
  EXPECT_EQ(bytes[8], kRealDtypeCode);
  Tensor back = decode_prst(bytes, "mem");
  EXPECT_EQ(back.shape(), t.shape());
  EXPECT_EQ(std::memcmp(back.data().data(), t.data().data(), t.numel() * sizeof(Real)), 0);
  const auto path = std::filesystem::temp_directory_path() / "prs_engine_roundtrip.prst";
  write_prst(path, t);
  Tensor disk = read_prst(path);
  EXPECT_EQ(std::memcmp(disk.data().data(), t.data().data(), t.numel() * sizeof(Real)), 0);
  std::filesystem::remove(path);
}

TEST(Prst, CorruptInputIsFormatError) {
  auto bytes = encode_prst(Tensor({2}, {1, 2}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_prst(bad_magic, "mem"), FormatError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_prst(truncated, "mem"), FormatError);
  auto bad_dtype = bytes;
  bad_dtype[8] = 7;
  EXPECT_THROW(decode_prst(bad_dtype, "mem"), FormatError);
}

}  // namespace
}  // namespace prs
