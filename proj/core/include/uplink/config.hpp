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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uplink/models.hpp"
#include "uplink/step_schedule.hpp"

// Scenario files. The grammar is documented in docs/config.md.
namespace uplink {

enum class SchedulerKind { kAuction, kJointOptimal, kMlwdf };

std::string_view to_string(SchedulerKind kind);
std::optional<SchedulerKind> scheduler_from_string(std::string_view name);

struct LearnerSettings {
  StepSchedule steps;
  double lambda_max = 1000.0;
  bool monotone_values = false;

  friend bool operator==(const LearnerSettings&, const LearnerSettings&) = default;
};

struct UserGroup {
  int users = 1;
  double alpha_db = -0.08;
  double packets_per_frame = 0.1;
  double delay_ms = 0.0;

  friend bool operator==(const UserGroup&, const UserGroup&) = default;
};

enum class SweepField { kDelayMs, kAlphaDb, kPacketsPerFrame, kPeakPower };

std::string_view to_string(SweepField field);
std::optional<SweepField> sweep_field_from_string(std::string_view name);

struct SweepColumn {
  SweepField field = SweepField::kDelayMs;
  std::vector<double> values;

  friend bool operator==(const SweepColumn&, const SweepColumn&) = default;
};

// Columns of equal length; point k sets every column's k-th value.
struct SweepSpec {
  std::vector<int> groups;  // 1-based group ids touched by per-group fields; empty = all
  std::vector<SweepColumn> columns;

  std::size_t points() const { return columns.empty() ? 0 : columns.front().values.size(); }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct CalibrationSpec {
  std::vector<double> peak_powers;

  friend bool operator==(const CalibrationSpec&, const CalibrationSpec&) = default;
};

// A single-user instance with explicit distributions for the offline solver.
struct OracleSpec {
  int buffer = 10;
  double delay_ms = 3.0;
  std::vector<double> arrival_pmf;  // empty: derived from group 1's traffic
  std::vector<double> channel_pmf;  // empty: derived from group 1's alpha
  double failure_prob = 0.0;
  std::int64_t learner_horizon = 100000;
  int learner_runs = 3;

  friend bool operator==(const OracleSpec&, const OracleSpec&) = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<SchedulerKind> schedulers{SchedulerKind::kAuction};
  int runs = 20;
  std::uint64_t seed_base = 1;
  std::int64_t horizon = 100000;
  std::int64_t warmup = 0;

  int buffer = 100;
  double frame_ms = 1.0;
  PowerModel power;
  std::vector<double> channel_boundaries_db;  // both empty: eight-level binning
  std::vector<double> channel_levels_db;

  double pareto_shape = 1.2;
  double pareto_mode_bits = 2000.0;
  double pareto_cutoff_bits = 10000.0;

  std::vector<UserGroup> groups;
  LearnerSettings auction;
  LearnerSettings joint;
  std::vector<double> gamma;  // empty: uniform
  double cell_budget = 1e7;

  std::optional<SweepSpec> sweep;
  std::optional<CalibrationSpec> calibration;
  std::optional<OracleSpec> oracle;

  int num_users() const;
  ChannelBinning binning() const;
  TrafficModel traffic(const UserGroup& group) const;
  // Throws ConfigError (line 0) naming the offending field.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioConfig& config);

}  // namespace uplink
