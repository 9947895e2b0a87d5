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

#include "prs/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace prs {
inline namespace PRS_REAL_ABI {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace detail {

Real* Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), Real(0));
  return grad.data();
}

}  // namespace detail

namespace {

void check_extents(const Shape& shape) {
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (shape[i] == 0)
      throw ShapeError("tensor extent " + std::to_string(i) + " is zero in shape " +
                       shape_string(shape));
}

thread_local bool tls_grad_mode = true;

}  // namespace

Tensor::Tensor() : Tensor(Shape{}, Real(0)) {}

Tensor::Tensor(Shape shape, Real fill) : node_(std::make_shared<detail::Node>()) {
  check_extents(shape);
  node_->value.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<Real> values)
    : node_(std::make_shared<detail::Node>()) {
  check_extents(shape);
  if (shape_numel(shape) != values.size())
    throw ShapeError("shape " + shape_string(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " elements, got " +
                     std::to_string(values.size()));
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{}, value); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank())
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape()));
  return node_->shape[axis];
}

Real Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value.front();
}

Tensor& Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  return *this;
}

std::span<const Real> Tensor::grad() const { return {node_->grad_buffer(), numel()}; }

std::span<Real> Tensor::mutable_grad() { return {node_->grad_buffer(), numel()}; }

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), Real(0)); }

Tensor Tensor::clone() const { return Tensor(node_->shape, node_->value); }

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(const char* name, const std::shared_ptr<detail::Node>& output,
                  std::vector<std::shared_ptr<detail::Node>> inputs, BackwardFn backward) {
  output->requires_grad = true;
  output->producer = name;
  output->tape_generation = generation_;
  output->tape_index = entries_.size();
  entries_.push_back(Entry{name, output, std::move(inputs), std::move(backward)});
}

void Tape::reset() {
  entries_.clear();
  ++generation_;
}

void Tape::backward(const Tensor& loss) {
  const auto& node = loss.node();
  if (loss.numel() != 1)
    throw AutogradError("backward() needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  if (node->tape_generation != generation_ || node->tape_index >= entries_.size() ||
      entries_[node->tape_index].output != node)
    throw AutogradError(
        "backward() on a loss that is not on the current tape (detached, or the tape "
        "was already consumed)");
  node->grad_buffer()[0] += Real(1);
  for (std::size_t i = node->tape_index + 1; i-- > 0;) {
    Entry& e = entries_[i];
    if (e.output->grad.empty()) continue;
    e.backward();
  }
  reset();
}

bool grad_mode_enabled() { return tls_grad_mode; }

NoGradGuard::NoGradGuard() : previous_(tls_grad_mode) { tls_grad_mode = false; }
NoGradGuard::~NoGradGuard() { tls_grad_mode = previous_; }

void backward(const Tensor& loss) { Tape::current().backward(loss); }

}  // namespace PRS_REAL_ABI
}  // namespace prs
