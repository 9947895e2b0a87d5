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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prs/tensor.hpp"

namespace prs {

/// Named trainable tensors in registration order. The order fixes the
/// initialisation stream and the checkpoint layout.
class ParameterSet {
 public:
  /// Registers and returns a handle sharing storage with the stored tensor.
  Tensor add(std::string name, Tensor value);

  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  void zero_grad();

  /// Deep copy of all values (gradients dropped, trainable flags kept).
  ParameterSet clone() const;

  /// Overwrites values in place from another set with identical names and
  /// shapes; throws CheckpointError on the first mismatch.
  void assign_from(const ParameterSet& other);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace prs
