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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "uplink/errors.hpp"
#include "uplink/experiments.hpp"

namespace fs = std::filesystem;
using namespace uplink;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kGuardRefusal = 3,
  kInvariantBreach = 4,
};

struct Common {
  std::string config;
  std::uint64_t seed_base = 0;
  bool has_seed_base = false;
  std::string out_dir = ".";
  bool trace = false;
  int jobs = 1;
};

RunOptions options_from(const Common& c) {
  RunOptions o;
  o.jobs = c.jobs;
  if (c.has_seed_base) o.seed_base = c.seed_base;
  o.trace = c.trace;
  return o;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Scenario file")->required();
  cmd->add_option("--seed-base", c.seed_base, "Seed of the first run (overrides the config)")
      ->each([&c](const std::string&) { c.has_seed_base = true; });
  cmd->add_option("--out-dir", c.out_dir, "Directory for the CSV output");
  cmd->add_flag("--trace", c.trace, "Also write the first run's per-frame trace");
  cmd->add_option("--jobs", c.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
}

int cmd_run(const Common& c) {
  const ScenarioConfig cfg = load_scenario(c.config);
  const ResultTable table = run_scenario(cfg, options_from(c));
  fs::create_directories(c.out_dir);
  {
    auto out = open_out(fs::path(c.out_dir) / "runs.csv");
    write_runs_csv(out, table);
  }
  {
    auto out = open_out(fs::path(c.out_dir) / "summary.csv");
    write_summary_csv(out, table);
  }
  if (c.trace) {
    for (const auto& row : table.rows) {
      const std::string name = "trace_" + std::to_string(row.point.index) + "_" +
                               std::string(to_string(row.scheduler)) + ".csv";
      auto out = open_out(fs::path(c.out_dir) / name);
      write_trace_csv(out, row);
    }
  }
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("%-6s %-14s %14s %14s\n", "point", "scheduler", "sum_power_w", "delay_ms");
  for (const auto& row : table.rows) {
    std::printf("%-6zu %-14s %14.6f %14.4f\n", row.point.index,
                std::string(to_string(row.scheduler)).c_str(), row.batch.sum_power.mean,
                row.batch.mean_packet_delay.mean * table.frame_ms);
  }
  return kOk;
}

int cmd_calibrate(const Common& c, bool skip_auction) {
  const ScenarioConfig cfg = load_scenario(c.config);
  const CalibrationResult res = calibrate_mlwdf(cfg, options_from(c), !skip_auction);
  fs::create_directories(c.out_dir);
  {
    auto out = open_out(fs::path(c.out_dir) / "calibration.csv");
    write_calibration_csv(out, res);
  }
  {
    auto out = open_out(fs::path(c.out_dir) / (res.derived.name + ".ini"));
    out << serialize_scenario(res.derived);
  }
  std::printf("%-8s %14s %14s %14s %14s\n", "peak_w", "mlwdf_ms", "auction_ms", "mlwdf_w",
              "auction_w");
  for (const auto& r : res.rows) {
    std::printf("%-8.3g %14.4f %14.4f %14.6f %14.6f\n", r.peak_power, r.mlwdf_delay_ms,
                r.auction_delay_ms.value_or(NAN), r.mlwdf_power_peak_charge,
                r.auction_power.value_or(NAN));
  }
  return kOk;
}

int cmd_oracle(const Common& c) {
  const ScenarioConfig cfg = load_scenario(c.config);
  const OracleCheckResult res = oracle_check(cfg, options_from(c));
  fs::create_directories(c.out_dir);
  {
    auto out = open_out(fs::path(c.out_dir) / "oracle.csv");
    write_oracle_csv(out, res);
  }
  {
    auto out = open_out(fs::path(c.out_dir) / "oracle_policy.csv");
    write_oracle_policy_csv(out, res);
  }
  std::printf("queue constraint %.6f, lambda* %.6g, optimal power %.6f (mixed %.6f), queue %.6f\n",
              res.queue_constraint, res.solution.lambda_star,
              res.solution.feasible_stats.avg_power, res.solution.mixed_power,
              res.solution.feasible_stats.avg_queue);
  std::printf("policy monotonicity %.4f (%d pairs)\n", res.monotonicity.fraction(),
              res.monotonicity.pairs);
  for (const auto& v : res.monotonicity.violations) std::printf("  %s\n", v.c_str());
  for (std::size_t k = 0; k < res.learner_runs.size(); ++k) {
    const auto& r = res.learner_runs[k];
    std::printf("learner seed %llu: power %.6f queue %.6f lambda %.6g\n",
                static_cast<unsigned long long>(res.seeds[k]), r.avg_power, r.avg_queue,
                r.final_lambda);
    if (r.lambda_hit_ceiling) {
      std::cerr << "warning: learner seed " << res.seeds[k]
                << ": multiplier reached its ceiling\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink power/delay scheduling experiments"};
  app.require_subcommand(1);
  Common common;
  bool skip_auction = false;

  auto* run = app.add_subcommand("run", "Run every sweep point with every configured scheduler");
  add_common(run, common);
  auto* cal = app.add_subcommand("calibrate-mlwdf",
                                 "Match auction delay constraints to M-LWDF's achieved delays");
  add_common(cal, common);
  cal->add_flag("--no-auction", skip_auction, "Only run M-LWDF and write the derived config");
  auto* orc = app.add_subcommand("oracle-check",
                                 "Solve the single-user instance offline and run the learner on it");
  add_common(orc, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (run->parsed()) return cmd_run(common);
    if (cal->parsed()) return cmd_calibrate(common, skip_auction);
    return cmd_oracle(common);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const GuardRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kGuardRefusal;
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kInvariantBreach;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
