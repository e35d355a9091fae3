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

#include "uplink/step_schedule.hpp"

#include <cmath>

#include "uplink/errors.hpp"

namespace uplink {

void StepSchedule::validate() const {
  if (!(f_exponent > 0.5 && f_exponent <= 1.0)) {
    throw ContractViolation("f exponent must lie in (0.5, 1]");
  }
  if (!(e_exponent > f_exponent && e_exponent <= 1.0)) {
    throw ContractViolation("e exponent must lie in (f exponent, 1]");
  }
  if (!(f_scale > 0.0) || !(e_scale > 0.0)) {
    throw ContractViolation("step scales must be positive");
  }
}

StepValues StepSchedule::at(std::int64_t n) const {
  if (n < 1) throw ContractViolation("step index starts at 1");
  const double dn = static_cast<double>(n);
  return {f_scale * std::pow(dn, -f_exponent), e_scale * std::pow(dn, -e_exponent)};
}

StepValues step_values(const StepSchedule& sched, std::int64_t n) { return sched.at(n); }

}  // namespace uplink
