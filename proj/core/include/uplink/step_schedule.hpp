/*
 Copyright 2026 The uplinksched Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>

namespace uplink {

struct StepValues {
  double f = 1.0;  // value-function (fast) step
  double e = 1.0;  // multiplier (slow) step
};

// Polynomial step sequences f_n = f_scale * n^-f_exponent and
// e_n = e_scale * n^-e_exponent. With 0.5 < f_exponent < e_exponent <= 1 both
// sequences are non-summable, square-summable, and e_n / f_n -> 0.
struct StepSchedule {
  double f_exponent = 0.6;
  double e_exponent = 1.0;
  double f_scale = 1.0;
  double e_scale = 1.0;

  void validate() const;
  StepValues at(std::int64_t n) const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

StepValues step_values(const StepSchedule& sched, std::int64_t n);

}  // namespace uplink
