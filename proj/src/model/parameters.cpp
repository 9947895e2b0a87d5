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

#include "prs/parameters.hpp"

#include <algorithm>

namespace prs {

Tensor ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ConfigError("duplicate parameter name " + name);
  entries_.emplace_back(std::move(name), value);
  return value;
}

const Tensor& ParameterSet::at(std::string_view name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw CheckpointError("no parameter named " + std::string(name));
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [n, t] : entries_) {
    Tensor c = t.clone();
    c.set_requires_grad(t.requires_grad());
    out.entries_.emplace_back(n, c);
  }
  return out;
}

void ParameterSet::assign_from(const ParameterSet& other) {
  if (other.size() != size())
    throw CheckpointError("parameter count mismatch: expected " + std::to_string(size()) +
                          ", got " + std::to_string(other.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& [name, dst] = entries_[i];
    const Tensor& src = other.at(name);
    if (src.shape() != dst.shape())
      throw CheckpointError("parameter " + name + " has shape " + shape_string(src.shape()) +
                            ", model expects " + shape_string(dst.shape()));
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
}

}  // namespace prs
