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

#include "prs/init.hpp"

#include <cmath>

namespace prs {
inline namespace PRS_REAL_ABI {

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (Real& v : t.mutable_data()) v = static_cast<Real>(rng.uniform(-a, a));
  t.set_requires_grad(true);
  return t;
}

Tensor zeros_parameter(Shape shape) {
  Tensor t(std::move(shape));
  t.set_requires_grad(true);
  return t;
}

}  // namespace PRS_REAL_ABI
}  // namespace prs
