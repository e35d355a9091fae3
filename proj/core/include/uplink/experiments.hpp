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
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uplink/config.hpp"
#include "uplink/engine.hpp"
#include "uplink/oracle.hpp"

namespace uplink {

// Q = a * D, with the delay converted from msec to frames.
double delay_to_queue_constraint(double mean_fragments_per_frame, double delay_ms,
                                 double frame_ms = 1.0);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::pair<SweepField, double>> settings;  // empty without a sweep
  ScenarioConfig config;  // the point's values applied, sweep cleared
};

// One point without a sweep; zero points for a sweep with empty columns.
std::vector<SweepPoint> expand_sweep(const ScenarioConfig& config);

SimConfig make_sim_config(const ScenarioConfig& config);

// Group (0-based) of every user, in user order.
std::vector<std::size_t> user_groups(const ScenarioConfig& config);

SchedulerFactory make_factory(SchedulerKind kind, const ScenarioConfig& config);

std::vector<std::uint64_t> run_seeds(std::uint64_t seed_base, int runs);

// Total offered fragments per frame over the mean of the best peak rate in a
// frame. Above 1 no TDMA schedule can keep the queues stable.
double peak_rate_load(const SimConfig& config);

struct RunOptions {
  int jobs = 1;
  std::optional<std::uint64_t> seed_base;  // overrides the config
  bool trace = false;  // keep the first run's per-frame trace of every row
};

struct ResultRow {
  SweepPoint point;
  SchedulerKind scheduler = SchedulerKind::kAuction;
  SimConfig sim;
  BatchResult batch;
  std::vector<FrameRecord> trace;
};

struct ResultTable {
  double frame_ms = 1.0;
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

// Throws GuardRefusal before any simulation if a joint-optimal row is too big.
ResultTable run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct CalibrationRow {
  double peak_power = 0.0;
  double mlwdf_delay_ms = 0.0;
  double mlwdf_power = 0.0;              // rate-dependent accounting
  double mlwdf_power_peak_charge = 0.0;  // P-hat per scheduled frame
  std::optional<double> auction_delay_ms;
  std::optional<double> auction_power;
  std::optional<double> auction_max_delay_ms;  // worst single-run mean
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;
  ScenarioConfig derived;  // auction sweep over (peak_power, delay_ms)
  std::uint64_t seed_base = 0;
  int runs = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
};

// M-LWDF at every calibration power, then (optionally) the auction with the
// achieved delays as constraints.
CalibrationResult calibrate_mlwdf(const ScenarioConfig& config, const RunOptions& options = {},
                                  bool run_auction = true);

struct OracleCheckResult {
  double queue_constraint = 0.0;
  ConstrainedSolution solution;
  MonotonicityReport monotonicity;
  std::vector<std::uint64_t> seeds;
  std::vector<LearnerRunStats> learner_runs;
};

ExplicitMdp make_oracle_mdp(const ScenarioConfig& config);
double oracle_queue_constraint(const ScenarioConfig& config);
OracleCheckResult oracle_check(const ScenarioConfig& config, const RunOptions& options = {});

// Tidy CSV writers; column headers are documented in docs/output.md.
void write_runs_csv(std::ostream& os, const ResultTable& table);
void write_summary_csv(std::ostream& os, const ResultTable& table);
void write_trace_csv(std::ostream& os, const ResultRow& row);
void write_calibration_csv(std::ostream& os, const CalibrationResult& result);
void write_oracle_csv(std::ostream& os, const OracleCheckResult& result);
void write_oracle_policy_csv(std::ostream& os, const OracleCheckResult& result);

}  // namespace uplink
