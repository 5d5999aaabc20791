// Copyright 2026 The fedprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Central finite-difference check of the analytic gradient against the
// extended-precision reference forward pass.

#ifndef FEDPRINT_TESTS_GRADCHECK_H_
#define FEDPRINT_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <string>

#include "fedprint/langmodel.h"
#include "oracles.h"

namespace fedprint::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

// Relative error is |a - f| / max(|a|, |f|, floor); the floor keeps exact
// zeros (unused embedding rows, inactive ReLU units) from dividing by zero.
inline GradCheckResult finite_difference_check(const GlobalModel& model,
                                               const Batch& batch, double h = 1e-6,
                                               double floor = 1e-7) {
  const Vector analytic = loss_and_grads(model, batch).grads.flatten();
  ParameterSet probe = model.params;
  GradCheckResult result;
  probe.for_each([&](const std::string& name, std::span<double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const Real up_step = Real(values[i]) - Real(original);
      const Real up = reference_batch_loss(probe, model.config, batch);
      values[i] = original - h;
      const Real down_step = Real(original) - Real(values[i]);
      const Real down = reference_batch_loss(probe, model.config, batch);
      values[i] = original;
      const double numeric = static_cast<double>((up - down) / (up_step + down_step));
      const double a = analytic[result.checked];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), floor});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = name + "[" + std::to_string(i) + "]";
      }
      ++result.checked;
    }
  });
  return result;
}

}  // namespace fedprint::testing

#endif  // FEDPRINT_TESTS_GRADCHECK_H_
