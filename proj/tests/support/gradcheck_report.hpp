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
#include <string>
#include <vector>

// Precision-independent gradcheck results, so one binary can drive both the
// f32 and the f64 engine builds.
namespace prs::testing {

struct GradcheckOutcome {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_rel_error = 0;
};

struct GradcheckSummary {
  std::string precision;
  double step = 0;
  double tolerance = 0;
  std::vector<GradcheckOutcome> outcomes;

  bool all_passed() const {
    for (const auto& o : outcomes)
      if (o.failures != 0 || o.instances == 0) return false;
    return !outcomes.empty();
  }
};

GradcheckSummary run_engine_gradchecks_f32(std::size_t seeds);
GradcheckSummary run_engine_gradchecks_f64(std::size_t seeds);

}  // namespace prs::testing
