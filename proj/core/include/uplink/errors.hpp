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
#include <stdexcept>
#include <string>

namespace uplink {

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A simulation invariant failed during a run. Carries the frame index.
class InvariantBreach : public std::runtime_error {
 public:
  InvariantBreach(std::int64_t frame, const std::string& detail)
      : std::runtime_error("frame " + std::to_string(frame) + ": " + detail),
        frame_(frame),
        detail_(detail) {}

  std::int64_t frame() const noexcept { return frame_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::int64_t frame_;
  std::string detail_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& what)
      : std::runtime_error(format(line, field, what)),
        line_(line),
        field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(int line, const std::string& field,
                            const std::string& what) {
    std::string out = "config";
    if (line > 0) out += " line " + std::to_string(line);
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + what;
  }

  int line_;
  std::string field_;
};

// The joint-state table would exceed the configured cell budget.
class GuardRefusal : public std::runtime_error {
 public:
  GuardRefusal(double cells, double budget)
      : std::runtime_error("joint state space has " + std::to_string(cells) +
                           " cells, budget is " + std::to_string(budget)),
        cells_(cells) {}

  double cells() const noexcept { return cells_; }

 private:
  double cells_;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(long iterations, double residual)
      : std::runtime_error("relative value iteration did not converge after " +
                           std::to_string(iterations) +
                           " iterations, residual " + std::to_string(residual)),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class InfeasibleConstraint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uplink
