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

#include "prs/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "prs/kernels.hpp"

namespace prs {
inline namespace PRS_REAL_ABI {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!grad_mode_enabled()) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

void check_finite(const Tensor& out, const char* op) {
  const auto v = out.data();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw NumericError(std::string(op) + " produced a non-finite value at element " +
                         std::to_string(i) + " of " + shape_string(out.shape()));
}

// Gradient buffer of an input when it participates in differentiation.
Real* grad_of(detail::Node* n) { return n->requires_grad ? n->grad_buffer() : nullptr; }

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": " + what + " must have rank " +
                     std::to_string(rank) + ", got " + shape_string(t.shape()));
}

template <typename F, typename DF>
Tensor unary(const Tensor& x, const char* name, F f, DF df) {
  Tensor out(x.shape());
  const auto in = x.data();
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  check_finite(out, name);
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record(name, out.node(), {x.node()}, [xn, on, df] {
      Real* g = grad_of(xn);
      if (g == nullptr) return;
      for (std::size_t i = 0; i < on->value.size(); ++i)
        g[i] += on->grad[i] * df(xn->value[i], on->value[i]);
    });
  }
  return out;
}

enum class BinaryKind { kAdd, kSub, kMul };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* name) {
  // 0: same shape, 1: b is a broadcast scalar, 2: a is a broadcast scalar
  int mode;
  if (a.shape() == b.shape()) {
    mode = 0;
  } else if (b.numel() == 1) {
    mode = 1;
  } else if (a.numel() == 1) {
    mode = 2;
  } else {
    throw ShapeError(std::string(name) + ": shape mismatch " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
  Tensor out(mode == 2 ? b.shape() : a.shape());
  const auto av = a.data();
  const auto bv = b.data();
  auto o = out.mutable_data();
  const std::size_t n = o.size();
  auto at = [&](std::span<const Real> v, bool scalar, std::size_t i) {
    return scalar ? v[0] : v[i];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Real x = at(av, mode == 2, i), y = at(bv, mode == 1, i);
    o[i] = kind == BinaryKind::kAdd ? x + y : kind == BinaryKind::kSub ? x - y : x * y;
  }
  check_finite(out, name);
  if (should_record({&a, &b})) {
    detail::Node* an = a.node().get();
    detail::Node* bn = b.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record(name, out.node(), {a.node(), b.node()}, [=] {
      Real* ga = grad_of(an);
      Real* gb = grad_of(bn);
      const bool a_scalar = mode == 2, b_scalar = mode == 1;
      for (std::size_t i = 0; i < n; ++i) {
        const Real g = on->grad[i];
        Real da, db;
        switch (kind) {
          case BinaryKind::kAdd: da = g; db = g; break;
          case BinaryKind::kSub: da = g; db = -g; break;
          default:
            da = g * bn->value[b_scalar ? 0 : i];
            db = g * an->value[a_scalar ? 0 : i];
        }
        if (ga != nullptr) ga[a_scalar ? 0 : i] += da;
        if (gb != nullptr) gb[b_scalar ? 0 : i] += db;
      }
    });
  }
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
  require_rank(input, 4, "conv2d", "input");
  require_rank(weight, 4, "conv2d", "weight");
  require_rank(bias, 1, "conv2d", "bias");
  if (weight.dim(2) != weight.dim(3))
    throw ShapeError("conv2d: kernel must be square, got " + shape_string(weight.shape()));
  if (input.dim(1) != weight.dim(1))
    throw ShapeError("conv2d: input dimension 1 (channels) is " +
                     std::to_string(input.dim(1)) + " but weight dimension 1 expects " +
                     std::to_string(weight.dim(1)));
  if (bias.dim(0) != weight.dim(0))
    throw ShapeError("conv2d: bias dimension 0 is " + std::to_string(bias.dim(0)) +
                     " but weight has " + std::to_string(weight.dim(0)) + " output channels");
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  kernels::ConvGeometry g;
  g.batch = input.dim(0);
  g.in_channels = input.dim(1);
  g.height = input.dim(2);
  g.width = input.dim(3);
  g.out_channels = weight.dim(0);
  g.kernel = weight.dim(2);
  g.stride = stride;
  g.padding = padding;
  if (g.height + 2 * padding < g.kernel || g.width + 2 * padding < g.kernel)
    throw ShapeError("conv2d: kernel " + std::to_string(g.kernel) +
                     " does not fit padded input " + shape_string(input.shape()));

  const std::size_t plane = g.out_height() * g.out_width();
  Tensor out(Shape{g.batch, g.out_channels, g.out_height(), g.out_width()});
  auto cols = std::make_shared<std::vector<Real>>();
  if (!g.is_pointwise()) cols->resize(g.batch * g.patch_size() * plane);
  kernels::conv2d_forward(g, input.data().data(), weight.data().data(), bias.data().data(),
                          out.mutable_data().data(), cols->data());
  check_finite(out, "conv2d");
  if (should_record({&input, &weight, &bias})) {
    detail::Node* in = input.node().get();
    detail::Node* w = weight.node().get();
    detail::Node* b = bias.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("conv2d", out.node(), {input.node(), weight.node(), bias.node()},
                           [=] {
                             kernels::conv2d_backward(g, on->grad.data(), in->value.data(),
                                                      cols->data(), w->value.data(),
                                                      grad_of(in), grad_of(w), grad_of(b));
                           });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const std::size_t n = x.dim(0), fin = x.dim(1), fout = weight.dim(1);
  if (weight.dim(0) != fin)
    throw ShapeError("linear: input dimension 1 is " + std::to_string(fin) +
                     " but weight dimension 0 is " + std::to_string(weight.dim(0)));
  if (bias.dim(0) != fout)
    throw ShapeError("linear: bias dimension 0 is " + std::to_string(bias.dim(0)) +
                     " but weight dimension 1 is " + std::to_string(fout));
  Tensor out(Shape{n, fout});
  auto o = out.mutable_data();
  kernels::gemm_nn(n, fout, fin, x.data().data(), weight.data().data(), o.data(), false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < fout; ++j) o[i * fout + j] += bias.data()[j];
  check_finite(out, "linear");
  if (should_record({&x, &weight, &bias})) {
    detail::Node* xn = x.node().get();
    detail::Node* w = weight.node().get();
    detail::Node* b = bias.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("linear", out.node(), {x.node(), weight.node(), bias.node()}, [=] {
      const Real* g = on->grad.data();
      if (Real* gx = grad_of(xn)) kernels::gemm_nt_acc(n, fin, fout, g, w->value.data(), gx);
      if (Real* gw = grad_of(w)) kernels::gemm_tn(fin, fout, n, xn->value.data(), g, gw, true);
      if (Real* gb = grad_of(b))
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < fout; ++j) gb[j] += g[i * fout + j];
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid",
      [](Real v) {
        if (v >= 0) return Real(1) / (Real(1) + std::exp(-v));
        const Real e = std::exp(v);
        return e / (Real(1) + e);
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](Real v) { return v > 0 ? v : Real(0); },
      [](Real v, Real) { return v > 0 ? Real(1) : Real(0); });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, "abs", [](Real v) { return std::abs(v); },
      [](Real v, Real) { return v > 0 ? Real(1) : v < 0 ? Real(-1) : Real(0); });
}

Tensor square(const Tensor& x) {
  return unary(
      x, "square", [](Real v) { return v * v; }, [](Real v, Real) { return Real(2) * v; });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kAdd, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kSub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kMul, "mul"); }

Tensor add_scalar(const Tensor& x, Real c) {
  return unary(
      x, "add_scalar", [c](Real v) { return v + c; }, [](Real, Real) { return Real(1); });
}

Tensor mul_scalar(const Tensor& x, Real c) {
  return unary(
      x, "mul_scalar", [c](Real v) { return v * c; }, [c](Real, Real) { return c; });
}

Tensor sum(const Tensor& x) {
  Real s = 0;
  for (Real v : x.data()) s += v;
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("sum", out.node(), {x.node()}, [xn, on] {
      Real* g = grad_of(xn);
      for (std::size_t i = 0; i < xn->value.size(); ++i) g[i] += on->grad[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& x) {
  return mul_scalar(sum(x), Real(1) / static_cast<Real>(x.numel()));
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size())
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(first.size()));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != first.size())
      throw ShapeError("concat: rank mismatch " + shape_string(p.shape()) + " vs " +
                       shape_string(first));
    for (std::size_t d = 0; d < first.size(); ++d)
      if (d != axis && p.dim(d) != first[d])
        throw ShapeError("concat: dimension " + std::to_string(d) + " mismatch " +
                         shape_string(p.shape()) + " vs " + shape_string(first));
    out_shape[axis] += p.dim(axis);
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_row = out_shape[axis] * inner;

  Tensor out(out_shape);
  auto o = out.mutable_data();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(offset);
    const std::size_t row = p.dim(axis) * inner;
    for (std::size_t r = 0; r < outer; ++r)
      std::copy_n(p.data().data() + r * row, row, o.data() + r * out_row + offset);
    offset += row;
  }
  bool record = false;
  for (const Tensor& p : parts) record = record || should_record({&p});
  if (record) {
    std::vector<NodePtr> inputs;
    std::vector<detail::Node*> raw;
    for (const Tensor& p : parts) {
      inputs.push_back(p.node());
      raw.push_back(p.node().get());
    }
    detail::Node* on = out.node().get();
    Tape::current().record("concat", out.node(), std::move(inputs), [=] {
      for (std::size_t k = 0; k < raw.size(); ++k) {
        Real* g = grad_of(raw[k]);
        if (g == nullptr) continue;
        const std::size_t row = raw[k]->shape[axis] * inner;
        for (std::size_t r = 0; r < outer; ++r) {
          const Real* src = on->grad.data() + r * out_row + offsets[k];
          for (std::size_t i = 0; i < row; ++i) g[r * row + i] += src[i];
        }
      }
    });
  }
  return out;
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw ShapeError("reshape: cannot view " + shape_string(x.shape()) + " as " +
                     shape_string(shape));
  Tensor out(std::move(shape), std::vector<Real>(x.data().begin(), x.data().end()));
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("reshape", out.node(), {x.node()}, [xn, on] {
      Real* g = grad_of(xn);
      for (std::size_t i = 0; i < on->grad.size(); ++i) g[i] += on->grad[i];
    });
  }
  return out;
}

Tensor gather(const Tensor& x, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ShapeError("gather: empty index list");
  std::vector<Real> values;
  values.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= x.numel())
      throw ShapeError("gather: index " + std::to_string(idx) + " out of range for " +
                       shape_string(x.shape()));
    values.push_back(x.data()[idx]);
  }
  Tensor out(Shape{indices.size()}, std::move(values));
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    Tape::current().record("gather", out.node(), {x.node()}, [xn, on, idx] {
      Real* g = grad_of(xn);
      for (std::size_t i = 0; i < idx.size(); ++i) g[idx[i]] += on->grad[i];
    });
  }
  return out;
}

Tensor max_pool2d(const Tensor& x, std::size_t kernel, std::size_t stride) {
  require_rank(x, 4, "max_pool2d", "input");
  if (kernel == 0 || stride == 0) throw ShapeError("max_pool2d: kernel and stride must be positive");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < kernel || w < kernel)
    throw ShapeError("max_pool2d: kernel " + std::to_string(kernel) + " larger than input " +
                     shape_string(x.shape()));
  const std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  Tensor out(Shape{n, c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  const auto in = x.data();
  auto o = out.mutable_data();
  for (std::size_t plane = 0; plane < n * c; ++plane)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = plane * h * w + oy * stride * w + ox * stride;
        for (std::size_t ky = 0; ky < kernel; ++ky)
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = plane * h * w + (oy * stride + ky) * w + ox * stride + kx;
            if (in[idx] > in[best]) best = idx;
          }
        const std::size_t oi = (plane * oh + oy) * ow + ox;
        o[oi] = in[best];
        (*argmax)[oi] = best;
      }
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("max_pool2d", out.node(), {x.node()}, [xn, on, argmax] {
      Real* g = grad_of(xn);
      for (std::size_t i = 0; i < argmax->size(); ++i) g[(*argmax)[i]] += on->grad[i];
    });
  }
  return out;
}

Tensor spatial_mean(const Tensor& x) {
  require_rank(x, 4, "spatial_mean", "input");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor out(Shape{n, c});
  const auto in = x.data();
  auto o = out.mutable_data();
  const Real scale = Real(1) / static_cast<Real>(plane);
  for (std::size_t i = 0; i < n * c; ++i) {
    Real s = 0;
    for (std::size_t p = 0; p < plane; ++p) s += in[i * plane + p];
    o[i] = s * scale;
  }
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("spatial_mean", out.node(), {x.node()}, [=] {
      Real* g = grad_of(xn);
      for (std::size_t i = 0; i < n * c; ++i) {
        const Real gi = on->grad[i] * scale;
        for (std::size_t p = 0; p < plane; ++p) g[i * plane + p] += gi;
      }
    });
  }
  return out;
}

namespace {

struct AxisTap {
  std::size_t lo, hi;
  Real frac;
};

std::vector<AxisTap> axis_taps(std::size_t begin, std::size_t end, std::size_t out) {
  std::vector<AxisTap> taps(out);
  const double scale = static_cast<double>(end - begin) / static_cast<double>(out);
  const double first = static_cast<double>(begin), last = static_cast<double>(end - 1);
  for (std::size_t i = 0; i < out; ++i) {
    double src = first + (static_cast<double>(i) + 0.5) * scale - 0.5;
    src = std::clamp(src, first, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, end - 1), static_cast<Real>(src - static_cast<double>(lo))};
  }
  return taps;
}

}  // namespace

Tensor resample_rect(const Tensor& x, const PixelRect& rect, std::size_t out_h,
                     std::size_t out_w) {
  require_rank(x, 4, "resample_rect", "input");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (rect.x0 >= rect.x1 || rect.y0 >= rect.y1 || rect.x1 > w || rect.y1 > h)
    throw ShapeError("resample_rect: rectangle [" + std::to_string(rect.x0) + "," +
                     std::to_string(rect.y0) + "," + std::to_string(rect.x1) + "," +
                     std::to_string(rect.y1) + ") invalid for " + shape_string(x.shape()));
  if (out_h == 0 || out_w == 0) throw ShapeError("resample_rect: output extent is zero");
  const auto ty = std::make_shared<std::vector<AxisTap>>(axis_taps(rect.y0, rect.y1, out_h));
  const auto tx = std::make_shared<std::vector<AxisTap>>(axis_taps(rect.x0, rect.x1, out_w));
  Tensor out(Shape{n, c, out_h, out_w});
  const auto in = x.data();
  auto o = out.mutable_data();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const Real* src = in.data() + plane * h * w;
    Real* dst = o.data() + plane * out_h * out_w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const AxisTap& ay = (*ty)[oy];
      const Real* r0 = src + ay.lo * w;
      const Real* r1 = src + ay.hi * w;
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const AxisTap& ax = (*tx)[ox];
        const Real top = r0[ax.lo] + ax.frac * (r0[ax.hi] - r0[ax.lo]);
        const Real bot = r1[ax.lo] + ax.frac * (r1[ax.hi] - r1[ax.lo]);
        dst[oy * out_w + ox] = top + ay.frac * (bot - top);
      }
    }
  }
  check_finite(out, "resample_rect");
  if (should_record({&x})) {
    detail::Node* xn = x.node().get();
    detail::Node* on = out.node().get();
    Tape::current().record("resample_rect", out.node(), {x.node()}, [=] {
      Real* g = grad_of(xn);
      for (std::size_t plane = 0; plane < n * c; ++plane) {
        Real* gsrc = g + plane * h * w;
        const Real* gdst = on->grad.data() + plane * out_h * out_w;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const AxisTap& ay = (*ty)[oy];
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const AxisTap& ax = (*tx)[ox];
            const Real go = gdst[oy * out_w + ox];
            const Real wy1 = ay.frac, wy0 = Real(1) - ay.frac;
            const Real wx1 = ax.frac, wx0 = Real(1) - ax.frac;
            gsrc[ay.lo * w + ax.lo] += go * wy0 * wx0;
            gsrc[ay.lo * w + ax.hi] += go * wy0 * wx1;
            gsrc[ay.hi * w + ax.lo] += go * wy1 * wx0;
            gsrc[ay.hi * w + ax.hi] += go * wy1 * wx1;
          }
        }
      }
    });
  }
  return out;
}

Tensor resize_bilinear(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  require_rank(x, 4, "resize_bilinear", "input");
  return resample_rect(x, PixelRect{0, 0, x.dim(3), x.dim(2)}, out_h, out_w);
}

Tensor flip_horizontal(const Tensor& x) {
  require_rank(x, 4, "flip_horizontal", "input");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor out(x.shape());
  const auto in = x.data();
  auto o = out.mutable_data();
  for (std::size_t p = 0; p < planes * h; ++p)
    for (std::size_t i = 0; i < w; ++i) o[p * w + i] = in[p * w + (w - 1 - i)];
  return out;
}

}  // namespace PRS_REAL_ABI
}  // namespace prs
