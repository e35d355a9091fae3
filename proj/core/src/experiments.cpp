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

#include "uplink/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>

#include "uplink/auction.hpp"
#include "uplink/errors.hpp"
#include "uplink/joint_optimal.hpp"
#include "uplink/mlwdf.hpp"

namespace uplink {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool touches(const SweepSpec& sweep, std::size_t group) {
  return sweep.groups.empty() ||
         std::find(sweep.groups.begin(), sweep.groups.end(), static_cast<int>(group) + 1) !=
             sweep.groups.end();
}

void apply(ScenarioConfig& cfg, const SweepSpec& sweep, SweepField field, double value) {
  if (field == SweepField::kPeakPower) {
    cfg.power.peak_power = value;
    return;
  }
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    if (!touches(sweep, g)) continue;
    auto& grp = cfg.groups[g];
    switch (field) {
      case SweepField::kDelayMs:
        grp.delay_ms = value;
        break;
      case SweepField::kAlphaDb:
        grp.alpha_db = value;
        break;
      case SweepField::kPacketsPerFrame:
        grp.packets_per_frame = value;
        break;
      case SweepField::kPeakPower:
        break;
    }
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Per-user average over users and runs.
double pooled(const BatchResult& b, double UserMetrics::*field) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : b.runs) {
    for (const auto& u : r.users) {
      s += u.*field;
      ++n;
    }
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

void check_guard(const ScenarioConfig& cfg) {
  const SimConfig sim = make_sim_config(cfg);
  const double cells = joint_state_cells(sim.num_users(), sim.buffer, sim.binning.size());
  if (cells > cfg.cell_budget) throw GuardRefusal(cells, cfg.cell_budget);
}

}  // namespace

double delay_to_queue_constraint(double mean_fragments_per_frame, double delay_ms,
                                 double frame_ms) {
  if (mean_fragments_per_frame < 0.0 || delay_ms < 0.0 || !(frame_ms > 0.0)) {
    throw ContractViolation("arrival rate and delay must be non-negative");
  }
  return mean_fragments_per_frame * delay_ms / frame_ms;
}

std::vector<SweepPoint> expand_sweep(const ScenarioConfig& config) {
  std::vector<SweepPoint> out;
  ScenarioConfig base = config;
  base.sweep.reset();
  if (!config.sweep) {
    out.push_back({0, {}, base});
    return out;
  }
  const SweepSpec& sweep = *config.sweep;
  for (std::size_t k = 0; k < sweep.points(); ++k) {
    SweepPoint p{k, {}, base};
    for (const auto& c : sweep.columns) {
      p.settings.emplace_back(c.field, c.values[k]);
      apply(p.config, sweep, c.field, c.values[k]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

SimConfig make_sim_config(const ScenarioConfig& config) {
  SimConfig sim;
  sim.binning = config.binning();
  sim.power = config.power;
  sim.buffer = config.buffer;
  sim.horizon = config.horizon;
  sim.warmup = config.warmup;
  for (const auto& g : config.groups) {
    UserParams u;
    u.alpha = db_to_linear(g.alpha_db);
    u.traffic = config.traffic(g);
    u.delay_constraint = g.delay_ms / config.frame_ms;
    for (int k = 0; k < g.users; ++k) sim.users.push_back(u);
  }
  return sim;
}

std::vector<std::size_t> user_groups(const ScenarioConfig& config) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    out.insert(out.end(), static_cast<std::size_t>(config.groups[g].users), g);
  }
  return out;
}

SchedulerFactory make_factory(SchedulerKind kind, const ScenarioConfig& config) {
  switch (kind) {
    case SchedulerKind::kAuction:
      return auction_factory(AuctionParams{config.auction.steps, config.auction.lambda_max,
                                           config.auction.monotone_values});
    case SchedulerKind::kJointOptimal:
      return joint_optimal_factory(JointParams{config.joint.steps, config.joint.lambda_max,
                                               config.cell_budget, config.gamma});
    case SchedulerKind::kMlwdf:
      return mlwdf_factory();
  }
  throw ContractViolation("unknown scheduler kind");
}

std::vector<std::uint64_t> run_seeds(std::uint64_t seed_base, int runs) {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < runs; ++k) out.push_back(seed_base + static_cast<std::uint64_t>(k));
  return out;
}

double peak_rate_load(const SimConfig& config) {
  const RateTable rates(config.power, config.binning);
  const int top = rates.max_rate();
  // cdf[r] = P(max_i peak_i <= r)
  std::vector<double> cdf(static_cast<std::size_t>(top) + 1, 1.0);
  double offered = 0.0;
  for (const auto& u : config.users) {
    offered += u.traffic.mean_fragments_per_frame();
    const auto p = config.binning.bin_probabilities(u.alpha);
    for (int r = 0; r <= top; ++r) {
      double f = 0.0;
      for (int l = 0; l < rates.levels(); ++l) {
        if (rates.peak_rate(l) <= r) f += p[static_cast<std::size_t>(l)];
      }
      cdf[static_cast<std::size_t>(r)] *= f;
    }
  }
  double capacity = 0.0;
  for (int r = 0; r < top; ++r) capacity += 1.0 - cdf[static_cast<std::size_t>(r)];
  if (capacity <= 0.0) return offered > 0.0 ? INFINITY : 0.0;
  return offered / capacity;
}

ResultTable run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  ResultTable table;
  table.frame_ms = config.frame_ms;
  const auto points = expand_sweep(config);
  const bool wants_joint = std::find(config.schedulers.begin(), config.schedulers.end(),
                                     SchedulerKind::kJointOptimal) != config.schedulers.end();
  if (wants_joint) {
    for (const auto& p : points) check_guard(p.config);
  }
  const auto seeds = run_seeds(options.seed_base.value_or(config.seed_base), config.runs);

  for (const auto& p : points) {
    for (SchedulerKind kind : config.schedulers) {
      ResultRow row;
      row.point = p;
      row.scheduler = kind;
      row.sim = make_sim_config(p.config);
      const auto factory = make_factory(kind, p.config);
      row.batch = run_batch(row.sim, factory, seeds, options.jobs);
      if (options.trace) {
        SimConfig traced = row.sim;
        traced.record_trace = true;
        auto sched = factory(traced, seeds.front());
        row.trace = run(traced, *sched, seeds.front()).trace;
      }
      std::map<std::string, int> counts;
      for (const auto& r : row.batch.runs) {
        for (const auto& w : r.warnings) ++counts[w];
      }
      for (const auto& [w, n] : counts) {
        table.warnings.push_back("point " + std::to_string(p.index) + " " +
                                 std::string(to_string(kind)) + ": " + w + " (" +
                                 std::to_string(n) + " of " + std::to_string(seeds.size()) +
                                 " runs)");
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

CalibrationResult calibrate_mlwdf(const ScenarioConfig& config, const RunOptions& options,
                                  bool run_auction) {
  config.validate();
  if (!config.calibration || config.calibration->peak_powers.empty()) {
    throw ConfigError(0, "calibration.peak_powers", "need at least one power");
  }
  CalibrationResult out;
  out.seed_base = options.seed_base.value_or(config.seed_base);
  out.runs = config.runs;
  const auto seeds = run_seeds(out.seed_base, config.runs);

  SweepSpec derived_sweep;
  SweepColumn powers{SweepField::kPeakPower, {}};
  SweepColumn delays{SweepField::kDelayMs, {}};
  for (double p : config.calibration->peak_powers) {
    ScenarioConfig point = config;
    point.sweep.reset();
    point.power.peak_power = p;
    const SimConfig sim = make_sim_config(point);
    const BatchResult b = run_batch(sim, mlwdf_factory(), seeds, options.jobs);
    CalibrationRow row;
    row.peak_power = p;
    row.mlwdf_delay_ms = b.mean_packet_delay.mean * config.frame_ms;
    row.mlwdf_power = pooled(b, &UserMetrics::avg_power);
    row.mlwdf_power_peak_charge = pooled(b, &UserMetrics::avg_power_peak_charge);
    out.first_frame = b.runs.front().first_frame;
    out.last_frame = b.runs.front().last_frame;
    out.rows.push_back(row);
    powers.values.push_back(p);
    delays.values.push_back(row.mlwdf_delay_ms);
  }
  derived_sweep.columns = {powers, delays};

  out.derived = config;
  out.derived.name = config.name + "-auction";
  out.derived.schedulers = {SchedulerKind::kAuction};
  out.derived.calibration.reset();
  out.derived.sweep = derived_sweep;

  if (run_auction) {
    const ResultTable t = run_scenario(out.derived, options);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const BatchResult& b = t.rows[k].batch;
      auto& row = out.rows[k];
      row.auction_delay_ms = b.mean_packet_delay.mean * config.frame_ms;
      row.auction_power = pooled(b, &UserMetrics::avg_power);
      double worst = 0.0;
      for (const auto& r : b.runs) worst = std::max(worst, r.mean_packet_delay());
      row.auction_max_delay_ms = worst * config.frame_ms;
    }
  }
  return out;
}

ExplicitMdp make_oracle_mdp(const ScenarioConfig& config) {
  if (!config.oracle) throw ConfigError(0, "oracle", "section missing");
  if (config.groups.empty()) throw ConfigError(0, "group.1", "section missing");
  const OracleSpec& o = *config.oracle;
  const UserGroup& g = config.groups.front();
  const ChannelBinning binning = config.binning();
  std::vector<double> arrivals =
      o.arrival_pmf.empty() ? config.traffic(g).fragments_per_frame_pmf(o.buffer)
                            : o.arrival_pmf;
  std::vector<double> channel =
      o.channel_pmf.empty() ? binning.bin_probabilities(db_to_linear(g.alpha_db)) : o.channel_pmf;
  return ExplicitMdp(o.buffer, std::move(arrivals), std::move(channel),
                     RateTable(config.power, binning), o.failure_prob);
}

double oracle_queue_constraint(const ScenarioConfig& config) {
  if (!config.oracle) throw ConfigError(0, "oracle", "section missing");
  const OracleSpec& o = *config.oracle;
  const double rate = o.arrival_pmf.empty()
                          ? config.traffic(config.groups.front()).mean_fragments_per_frame()
                          : make_oracle_mdp(config).mean_arrivals();
  return delay_to_queue_constraint(rate, o.delay_ms, config.frame_ms);
}

OracleCheckResult oracle_check(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const ExplicitMdp mdp = make_oracle_mdp(config);
  OracleCheckResult out;
  out.queue_constraint = oracle_queue_constraint(config);
  ConstrainedOptions co;
  co.lambda_max = config.auction.lambda_max;
  out.solution = solve_constrained(mdp, out.queue_constraint, co);
  out.monotonicity = policy_monotonicity(out.solution.feasible);

  LearnerConfig lc;
  lc.buffer = mdp.buffer;
  lc.queue_constraint = out.queue_constraint;
  lc.steps = config.auction.steps;
  lc.lambda_max = config.auction.lambda_max;
  lc.monotone_values = config.auction.monotone_values;
  out.seeds = run_seeds(options.seed_base.value_or(config.seed_base), config.oracle->learner_runs);
  for (std::uint64_t s : out.seeds) {
    out.learner_runs.push_back(simulate_learner(mdp, lc, config.oracle->learner_horizon, s));
  }
  return out;
}

void write_runs_csv(std::ostream& os, const ResultTable& table) {
  os << "point,scheduler,seed,first_frame,last_frame,user,group,alpha_db,packets_per_frame,"
        "delay_constraint_ms,peak_power_w,avg_power_w,avg_power_peak_charge_w,avg_queue,"
        "packet_delay_ms,fragment_delay_ms,arrived,transmitted,dropped\n";
  for (const auto& row : table.rows) {
    const auto groups = user_groups(row.point.config);
    for (const auto& r : row.batch.runs) {
      for (std::size_t i = 0; i < r.users.size(); ++i) {
        const auto& u = r.users[i];
        const auto& g = row.point.config.groups[groups[i]];
        os << row.point.index << ',' << to_string(row.scheduler) << ',' << r.seed << ','
           << r.first_frame << ',' << r.last_frame << ',' << i << ',' << groups[i] + 1 << ','
           << num(g.alpha_db) << ',' << num(g.packets_per_frame) << ',' << num(g.delay_ms)
           << ',' << num(row.sim.power.peak_power) << ',' << num(u.avg_power) << ','
           << num(u.avg_power_peak_charge) << ',' << num(u.avg_queue) << ','
           << num(u.avg_packet_delay * table.frame_ms) << ','
           << num(u.avg_fragment_delay * table.frame_ms) << ',' << u.arrived << ','
           << u.transmitted << ',' << u.dropped << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& os, const ResultTable& table) {
  os << "point,scheduler,group,users,alpha_db,packets_per_frame,delay_constraint_ms,"
        "peak_power_w,runs,seed_first,seed_last,first_frame,last_frame,power_w_mean,"
        "power_w_sd,power_peak_charge_w_mean,packet_delay_ms_mean,packet_delay_ms_sd,"
        "packet_delay_ms_max,queue_mean,drops_mean,sum_power_w_mean,sum_power_w_sd,"
        "peak_rate_load\n";
  for (const auto& row : table.rows) {
    const auto groups = user_groups(row.point.config);
    const auto& runs = row.batch.runs;
    if (runs.empty()) continue;
    const double load = peak_rate_load(row.sim);
    for (std::size_t g = 0; g < row.point.config.groups.size(); ++g) {
      const auto& grp = row.point.config.groups[g];
      std::vector<double> power, charge, delay, queue, drops;
      double worst = 0.0;
      for (const auto& r : runs) {
        std::vector<double> p, c, d, q, x;
        for (std::size_t i = 0; i < r.users.size(); ++i) {
          if (groups[i] != g) continue;
          const auto& u = r.users[i];
          p.push_back(u.avg_power);
          c.push_back(u.avg_power_peak_charge);
          d.push_back(u.avg_packet_delay * table.frame_ms);
          q.push_back(u.avg_queue);
          x.push_back(static_cast<double>(u.dropped));
          worst = std::max(worst, u.avg_packet_delay * table.frame_ms);
        }
        power.push_back(mean_of(p));
        charge.push_back(mean_of(c));
        delay.push_back(mean_of(d));
        queue.push_back(mean_of(q));
        drops.push_back(mean_of(x));
      }
      const Summary ps = summarize(power);
      const Summary ds = summarize(delay);
      os << row.point.index << ',' << to_string(row.scheduler) << ',' << g + 1 << ','
         << grp.users << ',' << num(grp.alpha_db) << ',' << num(grp.packets_per_frame) << ','
         << num(grp.delay_ms) << ',' << num(row.sim.power.peak_power) << ',' << runs.size()
         << ',' << runs.front().seed << ',' << runs.back().seed << ','
         << runs.front().first_frame << ',' << runs.front().last_frame << ',' << num(ps.mean)
         << ',' << num(ps.stddev) << ',' << num(mean_of(charge)) << ',' << num(ds.mean) << ','
         << num(ds.stddev) << ',' << num(worst) << ',' << num(mean_of(queue)) << ','
         << num(mean_of(drops)) << ',' << num(row.batch.sum_power.mean) << ','
         << num(row.batch.sum_power.stddev) << ',' << num(load) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& os, const ResultRow& row) {
  os << "frame,user,queue,level,bid,scheduled,power_w,drops\n";
  for (const auto& f : row.trace) {
    for (std::size_t i = 0; i < f.users.size(); ++i) {
      const auto& u = f.users[i];
      os << f.frame << ',' << i << ',' << u.queue << ',' << u.level << ',' << u.bid << ','
         << (u.scheduled ? 1 : 0) << ',' << num(u.power) << ',' << u.drops << '\n';
    }
  }
}

void write_calibration_csv(std::ostream& os, const CalibrationResult& result) {
  os << "peak_power_w,mlwdf_delay_ms,auction_delay_ms,mlwdf_power_w,auction_power_w,"
        "mlwdf_power_rate_w,auction_max_run_delay_ms,runs,seed_first,seed_last,first_frame,"
        "last_frame\n";
  const std::uint64_t last_seed =
      result.seed_base + static_cast<std::uint64_t>(std::max(result.runs, 1) - 1);
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& r : result.rows) {
    os << num(r.peak_power) << ',' << num(r.mlwdf_delay_ms) << ',' << opt(r.auction_delay_ms)
       << ',' << num(r.mlwdf_power_peak_charge) << ',' << opt(r.auction_power) << ','
       << num(r.mlwdf_power) << ',' << opt(r.auction_max_delay_ms) << ',' << result.runs << ','
       << result.seed_base << ',' << last_seed << ',' << result.first_frame << ','
       << result.last_frame << '\n';
  }
}

void write_oracle_csv(std::ostream& os, const OracleCheckResult& result) {
  os << "source,seed,lambda,avg_power_w,avg_queue,queue_constraint,monotonicity\n";
  const auto& s = result.solution;
  const std::string mono = num(result.monotonicity.fraction());
  os << "oracle_feasible,," << num(s.lambda_star) << ',' << num(s.feasible_stats.avg_power)
     << ',' << num(s.feasible_stats.avg_queue) << ',' << num(result.queue_constraint) << ','
     << mono << '\n';
  if (s.infeasible_lambda && s.infeasible_stats) {
    os << "oracle_infeasible,," << num(*s.infeasible_lambda) << ','
       << num(s.infeasible_stats->avg_power) << ',' << num(s.infeasible_stats->avg_queue) << ','
       << num(result.queue_constraint) << ",\n";
  }
  os << "oracle_mixed,,," << num(s.mixed_power) << ",," << num(result.queue_constraint)
     << ",\n";
  for (std::size_t k = 0; k < result.learner_runs.size(); ++k) {
    const auto& r = result.learner_runs[k];
    os << "learner," << result.seeds[k] << ',' << num(r.final_lambda) << ','
       << num(r.avg_power) << ',' << num(r.avg_queue) << ',' << num(result.queue_constraint)
       << ",\n";
  }
}

void write_oracle_policy_csv(std::ostream& os, const OracleCheckResult& result) {
  const auto& sol = result.solution.feasible;
  os << "queue,level,rate,value\n";
  for (int q = 0; q <= sol.buffer; ++q) {
    for (int l = 0; l < sol.levels; ++l) {
      os << q << ',' << l << ',' << sol.rate(q, l) << ','
         << num(sol.value[static_cast<std::size_t>(q * sol.levels + l)]) << '\n';
    }
  }
}

}  // namespace uplink
