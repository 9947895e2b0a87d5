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
#include <functional>
#include <string>
#include <vector>

#include "gradcheck_report.hpp"
#include "prs/random.hpp"
#include "prs/tensor.hpp"

namespace prs {
inline namespace PRS_REAL_ABI {
namespace gradcheck {

using prs::testing::GradcheckOutcome;

struct GradcheckCase {
  std::string name;
  // Fresh leaves for one instance; every returned tensor is checked.
  std::function<std::vector<Tensor>(Rng&)> make_inputs;
  std::function<Tensor(const std::vector<Tensor>&)> loss;
};

/// ||a - n|| / max(||a||, ||n||, floor) over one input tensor.
double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                      double floor);

GradcheckOutcome run_gradcheck(const GradcheckCase& c, std::size_t seeds, double step,
                               double tolerance, double floor);

/// One case per differentiable engine operation plus a small composite.
std::vector<GradcheckCase> engine_cases();

}  // namespace gradcheck
}  // namespace PRS_REAL_ABI
}  // namespace prs
