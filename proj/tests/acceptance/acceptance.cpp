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

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// criterion fails. Tolerances are pinned below.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "uplink/auction.hpp"
#include "uplink/errors.hpp"
#include "uplink/experiments.hpp"
#include "uplink/joint_optimal.hpp"
#include "uplink/mlwdf.hpp"
#include "uplink/oracle.hpp"
#include "uplink/step_schedule.hpp"

namespace fs = std::filesystem;
using namespace uplink;

namespace {

constexpr double kTable1Tol = 0.15;
constexpr double kDelaySlack = 1.10;
constexpr double kJointOverAuction = 0.05;
constexpr double kTable2Tol = 0.25;
constexpr double kOraclePowerTol = 0.10;
constexpr double kOracleQueueSlack = 1.05;
constexpr double kTrendSigmas = 2.0;
constexpr int kMinFeasibleChannelPoints = 4;
constexpr double kLittleTol = 0.05;
constexpr double kParetoMean = 3860.0;
constexpr double kParetoTol = 0.02;
constexpr double kBinTol = 0.01;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    notes.push_back(std::string(cond ? "    ok   " : "    MISS ") + what);
    ok = ok && cond;
  }
};

template <typename... T>
std::string fmt(const char* f, T... a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

int failures = 0;

void report(int id, const char* title, const Check& c) {
  std::printf("%s criterion %d: %s\n", c.ok ? "PASS" : "FAIL", id, title);
  for (const auto& n : c.notes) std::printf("%s\n", n.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

template <typename F>
void guarded(int id, const char* title, F&& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("threw: ") + e.what());
  }
  report(id, title, c);
}

ScenarioConfig config(const char* name) {
  return load_scenario(fs::path(UPLINK_CONFIG_DIR) / (std::string(name) + ".ini"));
}

RunOptions options() {
  RunOptions o;
  o.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return o;
}

bool within(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

// Conservation holds exactly for every run the harness produced.
std::int64_t conservation_breaks = 0;
std::int64_t runs_checked = 0;

void audit(const ResultTable& t) {
  for (const auto& row : t.rows) {
    for (const auto& r : row.batch.runs) {
      ++runs_checked;
      for (const auto& u : r.users) {
        if (u.arrived != u.transmitted + u.dropped + u.final_queue) ++conservation_breaks;
      }
    }
  }
}

struct GroupStats {
  double power = 0.0;
  double power_se = 0.0;
  double delay_ms = 0.0;
};

GroupStats group_stats(const ResultRow& row, std::size_t g, double frame_ms) {
  const auto groups = user_groups(row.point.config);
  std::vector<double> power, delay;
  for (const auto& r : row.batch.runs) {
    double p = 0.0, d = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < r.users.size(); ++i) {
      if (groups[i] != g) continue;
      p += r.users[i].avg_power;
      d += r.users[i].avg_packet_delay * frame_ms;
      ++n;
    }
    power.push_back(p / n);
    delay.push_back(d / n);
  }
  const Summary ps = summarize(power);
  const Summary ds = summarize(delay);
  return {ps.mean, ps.stddev / std::sqrt(static_cast<double>(power.size())), ds.mean};
}

std::vector<std::size_t> swept_groups(const ScenarioConfig& c) {
  std::vector<std::size_t> out;
  if (c.sweep && !c.sweep->groups.empty()) {
    for (int g : c.sweep->groups) out.push_back(static_cast<std::size_t>(g - 1));
  } else {
    for (std::size_t g = 0; g < c.groups.size(); ++g) out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------------------

void criterion1() {
  guarded(1, "two-user auction vs. joint optimum", [](Check& c) {
    const ScenarioConfig cfg = config("scenario1");
    RunOptions o = options();
    o.trace = true;
    const ResultTable t = run_scenario(cfg, o);
    audit(t);
    const double aa_want[] = {0.26522, 0.26097};
    const double oa_want[] = {0.26359, 0.24756};
    double sum[2][2] = {};
    for (const auto& row : t.rows) {
      const std::size_t k = row.point.index;
      const bool joint = row.scheduler == SchedulerKind::kJointOptimal;
      const double want = joint ? oa_want[k] : aa_want[k];
      const double got = row.batch.sum_power.mean;
      sum[k][joint] = got;
      const double limit = row.point.config.groups[0].delay_ms * kDelaySlack;
      double worst = 0.0;
      for (const auto& r : row.batch.runs) {
        for (const auto& u : r.users) worst = std::max(worst, u.avg_packet_delay * cfg.frame_ms);
      }
      const char* name = joint ? "joint" : "auction";
      c.expect(within(got, want, kTable1Tol),
               fmt("%s %g ms: sum power %.5f W vs %.5f W (+-15%%)", name,
                   row.point.config.groups[0].delay_ms, got, want));
      c.expect(worst <= limit, fmt("%s %g ms: worst per-run user delay %.3f ms <= %.3f ms", name,
                                   row.point.config.groups[0].delay_ms, worst, limit));
      for (const auto& f : row.trace) {
        int winners = 0;
        for (const auto& u : f.users) winners += u.scheduled;
        if (winners > 1) {
          c.expect(false, fmt("frame %lld has %d winners", static_cast<long long>(f.frame), winners));
          break;
        }
      }
    }
    for (int k = 0; k < 2; ++k) {
      c.expect(sum[k][1] <= sum[k][0] * (1.0 + kJointOverAuction),
               fmt("row %d: joint %.5f W <= auction %.5f W + 5%%", k, sum[k][1], sum[k][0]));
    }
  });
}

void criterion2() {
  guarded(2, "calibrated auction against M-LWDF", [](Check& c) {
    const ScenarioConfig cfg = config("table2");
    const CalibrationResult res = calibrate_mlwdf(cfg, options(), true);
    const std::map<double, double> reference{{1.5, 0.04206}, {2.0, 0.04737}, {2.5, 0.05530},
                                         {3.0, 0.07007}, {3.5, 0.07026}, {4.0, 0.07073},
                                         {4.5, 0.07074}};
    c.expect(res.rows.size() == reference.size(), fmt("%d power rows", static_cast<int>(res.rows.size())));
    for (const auto& r : res.rows) {
      const double aa = r.auction_power.value_or(NAN);
      const double delay = r.auction_delay_ms.value_or(NAN);
      c.expect(delay <= r.mlwdf_delay_ms * kDelaySlack,
               fmt("P=%.1f: auction delay %.3f ms <= 1.1 x M-LWDF %.3f ms", r.peak_power, delay,
                   r.mlwdf_delay_ms));
      c.expect(aa < r.mlwdf_power_peak_charge,
               fmt("P=%.1f: auction %.5f W < M-LWDF %.5f W", r.peak_power, aa,
                   r.mlwdf_power_peak_charge));
      const auto it = reference.find(r.peak_power);
      if (it == reference.end()) {
        c.expect(false, fmt("P=%.1f has no reference row", r.peak_power));
        continue;
      }
      c.expect(within(aa, it->second, kTable2Tol),
               fmt("P=%.1f: auction %.5f W vs %.5f W (+-25%%)", r.peak_power, aa, it->second));
    }
  });
}

// Policy enumeration on a B = 4 two-state instance; returns the optimal
// average cost and checks the solver's policy is among the optimal ones.
bool enumeration_agrees(std::string& detail) {
  const double bounds[] = {3.18};
  const double levels[] = {-8.47, 3.18};
  const RateTable rates(PowerModel{}, ChannelBinning::from_db(bounds, levels));
  const ExplicitMdp mdp(4, {0.6, 0.4}, {0.7, 0.3}, rates);
  const double lambda = 0.05;
  const RviaSolution sol = solve_rvia(mdp, lambda, 0.0);
  const int n = mdp.num_states();
  std::vector<int> limit(static_cast<std::size_t>(n)), policy(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < n; ++s) limit[s] = mdp.actions(s / 2, s % 2).max;
  auto cost = [&](const std::vector<int>& p) {
    const PolicyStats st = evaluate_policy(mdp, p);
    return st.avg_power + lambda * st.avg_queue;
  };
  double best = INFINITY;
  std::vector<std::vector<int>> optimal;
  long count = 0;
  while (true) {
    ++count;
    const double g = cost(policy);
    if (g < best - 1e-10) {
      best = g;
      optimal.clear();
    }
    if (std::abs(g - best) <= 1e-10) optimal.push_back(policy);
    int k = 0;
    while (k < n && policy[k] == limit[k]) policy[k++] = 0;
    if (k == n) break;
    ++policy[k];
  }
  const bool found = std::find(optimal.begin(), optimal.end(), sol.policy) != optimal.end();
  detail = fmt("B=4 enumeration over %ld policies: best %.8f, solver %.8f, solver policy %s",
               count, best, sol.beta, found ? "optimal" : "NOT optimal");
  return found && std::abs(sol.beta - best) < 1e-7;
}

void criterion3() {
  guarded(3, "online learner vs. offline optimum", [](Check& c) {
    const ScenarioConfig cfg = config("oracle");
    const OracleCheckResult r = oracle_check(cfg, options());
    const double opt = r.solution.feasible_stats.avg_power;
    const double delta = r.queue_constraint;
    c.expect(cfg.oracle->buffer <= 10 && make_oracle_mdp(cfg).levels() == 2,
             fmt("instance B=%d, %d channel states", cfg.oracle->buffer,
                 make_oracle_mdp(cfg).levels()));
    c.expect(cfg.oracle->learner_horizon >= 100000,
             fmt("%lld learner frames", static_cast<long long>(cfg.oracle->learner_horizon)));
    for (std::size_t k = 0; k < r.learner_runs.size(); ++k) {
      const auto& lr = r.learner_runs[k];
      c.expect(within(lr.avg_power, opt, kOraclePowerTol),
               fmt("seed %llu: power %.5f vs optimum %.5f (+-10%%)",
                   static_cast<unsigned long long>(r.seeds[k]), lr.avg_power, opt));
      c.expect(lr.avg_queue <= kOracleQueueSlack * delta,
               fmt("seed %llu: queue %.4f <= 1.05 x %.4f",
                   static_cast<unsigned long long>(r.seeds[k]), lr.avg_queue, delta));
    }
    std::string detail;
    c.expect(enumeration_agrees(detail), detail);
  });
}

struct TrendSpec {
  const char* config;
  SweepField field;
  int direction;  // +1 non-decreasing, -1 non-increasing
  bool feasibility_threshold;
  bool delays_gated = true;
};

void criterion4() {
  guarded(4, "scenario trends", [](Check& c) {
    const TrendSpec specs[] = {
        {"scenario2-sym", SweepField::kDelayMs, -1, false},
        {"scenario2-asym", SweepField::kDelayMs, -1, false},
        {"scenario3-sym", SweepField::kAlphaDb, -1, true},
        {"scenario3-asym", SweepField::kAlphaDb, -1, true},
        {"scenario4-sym", SweepField::kPacketsPerFrame, +1, false},
        {"scenario4-asym-packets", SweepField::kPacketsPerFrame, +1, false, false},
        {"scenario4-asym-mbits", SweepField::kPacketsPerFrame, +1, false},
    };
    for (const auto& s : specs) {
      const ScenarioConfig cfg = config(s.config);
      const ResultTable t = run_scenario(cfg, options());
      audit(t);
      const auto swept = swept_groups(cfg);
      const std::size_t points = t.rows.size();

      // Points where every group meets its constraint; with a threshold the
      // feasible set must be an upper range of the sweep.
      std::vector<bool> met(points, true);
      for (std::size_t k = 0; k < points; ++k) {
        for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
          const double limit = t.rows[k].point.config.groups[g].delay_ms * kDelaySlack;
          met[k] = met[k] && group_stats(t.rows[k], g, cfg.frame_ms).delay_ms <= limit;
        }
      }
      std::size_t first = 0;
      if (s.feasibility_threshold) {
        first = points;
        while (first > 0 && met[first - 1]) --first;
        c.expect(points - first >= kMinFeasibleChannelPoints,
                 fmt("%s: constraints met from point %zu of %zu on", s.config, first, points));
      }
      for (std::size_t k = first; k < points; ++k) {
        if (!met[k] && s.delays_gated) {
          c.expect(false, fmt("%s: point %zu misses its delay constraint", s.config, k));
        }
      }
      if (!s.feasibility_threshold) {
        const auto n_met = static_cast<std::size_t>(std::count(met.begin(), met.end(), true));
        const std::string line =
            fmt("%s: delay constraints met at %zu of %zu points", s.config, n_met, points);
        if (s.delays_gated) {
          c.expect(n_met == points, line);
        } else {
          c.notes.push_back("    info " + line + fmt(" (peak-rate load up to %.3f)",
                                                      peak_rate_load(t.rows.back().sim)));
        }
      }

      for (std::size_t g : swept) {
        bool trend = true;
        double worst_z = -INFINITY;
        for (std::size_t k = first + 1; k < points; ++k) {
          const GroupStats a = group_stats(t.rows[k - 1], g, cfg.frame_ms);
          const GroupStats b = group_stats(t.rows[k], g, cfg.frame_ms);
          const double se = std::hypot(a.power_se, b.power_se);
          const double wrong_way = s.direction * (a.power - b.power);  // > 0 is against the trend
          worst_z = std::max(worst_z, se > 0 ? wrong_way / se : (wrong_way > 0 ? INFINITY : 0));
          trend = trend && wrong_way <= kTrendSigmas * se;
        }
        const GroupStats lo = group_stats(t.rows[first], g, cfg.frame_ms);
        const GroupStats hi = group_stats(t.rows[points - 1], g, cfg.frame_ms);
        const bool overall = s.direction * (hi.power - lo.power) > 0;
        c.expect(trend && overall,
                 fmt("%s group %zu: power %s (%.5f -> %.5f W, worst step %.2f sigma)", s.config,
                     g + 1, s.direction > 0 ? "rises" : "falls", lo.power, hi.power, worst_z));
      }
    }
  });
}

void criterion5() {
  guarded(5, "invariant suites", [](Check& c) {
    // Step-size laws.
    for (const StepSchedule s : {StepSchedule{}, StepSchedule{0.51, 0.7, 1.0, 1.0}}) {
      double sum_f = 0, sum_e = 0, sq_f = 0, sq_e = 0, last_ratio = INFINITY;
      double sum_f_1e5 = 0, sum_e_1e5 = 0;
      bool ratio_monotone = true;
      for (std::int64_t n = 1; n <= 1000000; ++n) {
        const StepValues v = s.at(n);
        sum_f += v.f;
        sum_e += v.e;
        sq_f += v.f * v.f;
        sq_e += v.e * v.e;
        if (n == 100000) {
          sum_f_1e5 = sum_f;
          sum_e_1e5 = sum_e;
        }
        const double ratio = v.e / v.f;
        ratio_monotone = ratio_monotone && ratio <= last_ratio;
        last_ratio = ratio;
      }
      // Square sums are bounded by 1 + 1/(2p - 1); partial sums keep growing.
      c.expect(sq_f <= 1 + 1 / (2 * s.f_exponent - 1) && sq_e <= 1 + 1 / (2 * s.e_exponent - 1),
               fmt("steps %.2f/%.2f: square sums %.3f, %.3f bounded", s.f_exponent, s.e_exponent,
                   sq_f, sq_e));
      c.expect(sum_f - sum_f_1e5 > 1.0 && sum_e - sum_e_1e5 > 1.0,
               fmt("steps %.2f/%.2f: partial sums still grow past 1e5 (%.1f, %.2f)", s.f_exponent,
                   s.e_exponent, sum_f - sum_f_1e5, sum_e - sum_e_1e5));
      c.expect(ratio_monotone && last_ratio < 0.1,
               fmt("steps %.2f/%.2f: e/f decreasing to %.4f at 1e6", s.f_exponent, s.e_exponent,
                   last_ratio));
    }

    // Every frame of a traced 20-user run: one winner at most, power within
    // the peak, trace consistent with the metrics.
    ScenarioConfig cfg = config("table2");
    cfg.power.peak_power = 1.5;
    cfg.groups[0].delay_ms = 10.0;
    SimConfig sim = make_sim_config(cfg);
    sim.record_trace = true;
    for (SchedulerKind kind : {SchedulerKind::kAuction, SchedulerKind::kMlwdf}) {
      auto sched = make_factory(kind, cfg)(sim, 77);
      const RunResult r = run(sim, *sched, 77);
      std::int64_t bad = 0;
      for (const auto& f : r.trace) {
        int winners = 0;
        for (const auto& u : f.users) {
          winners += u.scheduled;
          if (u.power > sim.power.peak_power * (1 + 1e-12)) ++bad;
        }
        if (winners > 1) ++bad;
      }
      c.expect(bad == 0 && r.trace.size() == static_cast<std::size_t>(sim.horizon),
               fmt("%s: %lld frames traced, %lld exclusivity/peak violations",
                   std::string(to_string(kind)).c_str(),
                   static_cast<long long>(r.trace.size()), static_cast<long long>(bad)));
      double worst = 0.0;
      for (const auto& u : r.metrics.users) {
        worst = std::max(worst, std::abs(u.avg_queue - u.arrival_rate * u.avg_fragment_delay) /
                                    u.avg_queue);
      }
      c.expect(worst <= kLittleTol, fmt("%s: Little's law worst relative gap %.4f",
                                        std::string(to_string(kind)).c_str(), worst));
    }

    // Bit-identical reruns.
    sim.record_trace = false;
    sim.horizon = 20000;
    for (SchedulerKind kind : {SchedulerKind::kAuction, SchedulerKind::kMlwdf}) {
      auto a = make_factory(kind, cfg)(sim, 5);
      auto b = make_factory(kind, cfg)(sim, 5);
      c.expect(run(sim, *a, 5).metrics == run(sim, *b, 5).metrics,
               fmt("%s: identical reruns", std::string(to_string(kind)).c_str()));
    }
    {
      const ScenarioConfig s1 = config("scenario1");
      SimConfig js = make_sim_config(expand_sweep(s1)[0].config);
      js.horizon = 20000;
      auto a = make_factory(SchedulerKind::kJointOptimal, s1)(js, 5);
      auto b = make_factory(SchedulerKind::kJointOptimal, s1)(js, 5);
      c.expect(run(js, *a, 5).metrics == run(js, *b, 5).metrics, "joint-optimal: identical reruns");
    }

    c.expect(conservation_breaks == 0 && runs_checked > 0,
             fmt("fragment conservation exact in all %lld runs",
                 static_cast<long long>(runs_checked)));

    // Model statistics.
    const TrafficModel traffic;
    c.expect(within(traffic.mean_packet_bits(), kParetoMean, kParetoTol),
             fmt("packet mean %.1f bits (3860 +-2%%)", traffic.mean_packet_bits()));
    Rng rng = make_stream(2026, 0, StreamPurpose::kArrivals);
    double bits = 0;
    const int samples = 1000000;
    for (int i = 0; i < samples; ++i) bits += traffic.sample_packet_bits(rng);
    c.expect(within(bits / samples, kParetoMean, kParetoTol),
             fmt("sampled packet mean %.1f bits", bits / samples));
    const ChannelBinning bins = ChannelBinning::eight_level();
    const auto p = bins.bin_probabilities(1.0);
    std::vector<double> hits(8, 0.0);
    const RayleighFading fading{1.0};
    for (int i = 0; i < samples; ++i) hits[sample_channel_state(fading, bins, rng).level_index] += 1;
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
      worst = std::max({worst, std::abs(p[k] - 0.125), std::abs(hits[k] / samples - 0.125)});
    }
    c.expect(worst <= kBinTol, fmt("channel bins at unit mean gain within %.4f of 1/8", worst));
  });
}

void criterion6() {
  guarded(6, "offline policy structure", [](Check& c) {
    const ScenarioConfig cfg = config("oracle");
    const ExplicitMdp mdp = make_oracle_mdp(cfg);
    const double delta = oracle_queue_constraint(cfg);
    const ConstrainedSolution s = solve_constrained(mdp, delta);
    MonotonicityReport m = policy_monotonicity(s.feasible);
    c.expect(m.fraction() == 1.0, fmt("oracle instance, feasible end: %d/%d pairs", m.non_decreasing,
                                      m.pairs));
    if (s.infeasible_lambda) {
      m = policy_monotonicity(solve_rvia(mdp, *s.infeasible_lambda, delta));
      c.expect(m.fraction() == 1.0, fmt("oracle instance, infeasible end: %d/%d pairs",
                                        m.non_decreasing, m.pairs));
    }
    for (double theta : {0.1, 0.3}) {
      const ExplicitMdp f(mdp.buffer, mdp.arrival_pmf, mdp.channel_pmf, mdp.rates, theta);
      const ConstrainedSolution fs = solve_constrained(f, delta);
      m = policy_monotonicity(fs.feasible);
      c.expect(m.fraction() == 1.0,
               fmt("failure rate %.1f: %d/%d pairs", theta, m.non_decreasing, m.pairs));
    }
    {
      const double bounds[] = {3.18};
      const double levels[] = {-8.47, 3.18};
      const ExplicitMdp small(4, {0.6, 0.4}, {0.7, 0.3},
                              RateTable(PowerModel{}, ChannelBinning::from_db(bounds, levels)));
      m = policy_monotonicity(solve_rvia(small, 0.05, 0.0));
      c.expect(m.fraction() == 1.0, fmt("B=4 enumeration instance: %d/%d pairs", m.non_decreasing,
                                        m.pairs));
    }
    // Not an acceptance instance: eight levels at the Table II load. Reported
    // for information; its exceptions sit next to the full buffer.
    ScenarioConfig eight = config("table2");
    eight.oracle = OracleSpec{};
    eight.oracle->buffer = 30;
    eight.oracle->delay_ms = 10;
    const ExplicitMdp e = make_oracle_mdp(eight);
    const ConstrainedSolution es = solve_constrained(e, oracle_queue_constraint(eight));
    m = policy_monotonicity(es.feasible);
    std::string where;
    double mass = 0.0;
    for (const auto& v : m.violations) where += (where.empty() ? "" : "; ") + v;
    for (int q = 28; q <= 30; ++q) {
      for (int x = 0; x < e.levels(); ++x) mass += es.feasible_stats.stationary[e.state_index(q, x)];
    }
    c.notes.push_back(fmt("    info eight-level, B=30: %d/%d pairs [%s], stationary mass of q>=28 %.1e",
                          m.non_decreasing, m.pairs, where.c_str(), mass));
  });
}

}  // namespace

int main() {
  criterion1();
  criterion3();
  criterion6();
  criterion2();
  criterion4();
  criterion5();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
