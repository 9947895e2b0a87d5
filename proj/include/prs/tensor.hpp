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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prs/error.hpp"

#ifdef PRS_REAL_DOUBLE
#define PRS_REAL_ABI real64
#else
#define PRS_REAL_ABI real32
#endif

namespace prs {
inline namespace PRS_REAL_ABI {

#ifdef PRS_REAL_DOUBLE
using Real = double;
inline constexpr std::uint8_t kRealDtypeCode = 1;
#else
using Real = float;
inline constexpr std::uint8_t kRealDtypeCode = 0;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::uint64_t tape_generation = 0;
  std::size_t tape_index = static_cast<std::size_t>(-1);
  const char* producer = "leaf";

  // Returns the gradient buffer, allocating zeros on first use.
  Real* grad_buffer();
};

}  // namespace detail

/// Dense row-major tensor handle. Copies share storage; use clone() for a
/// deep copy. A tensor produced by a recorded operation keeps its inputs
/// alive through the active tape until backward() consumes it.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor scalar(Real value);

  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const Real> data() const { return node_->value; }
  std::span<Real> mutable_data() { return node_->value; }
  Real item() const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on);

  /// Gradient accumulated by backward(); zeros when nothing reached it.
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  void zero_grad();

  /// Deep copy of the values, detached from the tape.
  Tensor clone() const;
  Tensor detach() const { return clone(); }

  const char* producer() const { return node_->producer; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Thread-confined record of executed operations for reverse-mode
/// differentiation. Rebuilt every forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Entry {
    const char* name;
    std::shared_ptr<detail::Node> output;
    std::vector<std::shared_ptr<detail::Node>> inputs;
    BackwardFn backward;
  };

  /// The tape of the calling thread.
  static Tape& current();

  void record(const char* name, const std::shared_ptr<detail::Node>& output,
              std::vector<std::shared_ptr<detail::Node>> inputs,
              BackwardFn backward);

  std::size_t size() const { return entries_.size(); }
  std::uint64_t generation() const { return generation_; }

  /// Drops every entry and starts a new generation; tensors produced before
  /// become detached.
  void reset();

  void backward(const Tensor& loss);

 private:
  std::vector<Entry> entries_;
  std::uint64_t generation_ = 1;
};

/// True when operations on the calling thread should be recorded.
bool grad_mode_enabled();

/// Disables recording on the calling thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Populates grad on every requires_grad leaf reachable from a scalar loss and
/// consumes the tape.
void backward(const Tensor& loss);

}  // namespace PRS_REAL_ABI
}  // namespace prs
