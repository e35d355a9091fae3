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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "uplink/config.hpp"
#include "uplink/errors.hpp"

namespace uplink {
namespace {

const char* kMinimal = R"(
[scenario]
name = tiny
[group.1]
users = 2
)";

TEST(ConfigParse, DefaultsFillOmittedKeys) {
  const ScenarioConfig c = parse_scenario(kMinimal);
  EXPECT_EQ(c.name, "tiny");
  EXPECT_EQ(c.num_users(), 2);
  EXPECT_EQ(c.runs, 20);
  EXPECT_EQ(c.buffer, 100);
  EXPECT_DOUBLE_EQ(c.power.peak_power, 3.0);
  EXPECT_DOUBLE_EQ(c.auction.steps.f_exponent, 0.6);
  EXPECT_DOUBLE_EQ(c.auction.steps.e_exponent, 1.0);
  EXPECT_FALSE(c.sweep);
  EXPECT_EQ(c.binning().size(), 8);
}

TEST(ConfigParse, CommentsListsAndBooleans) {
  const ScenarioConfig c = parse_scenario(R"(
# leading comment
; another
[scenario]
schedulers = mlwdf, auction   # trailing
[system]
channel_boundaries_db = 3.18
channel_levels_db = -8.47, 3.18
[group.1]
[group.2]
users = 3
alpha_db = 1.5
[auction]
monotone_values = true
[sweep]
groups = 2
delay_ms = 3, 5
packets_per_frame = 0.1, 0.2
)");
  ASSERT_EQ(c.schedulers.size(), 2u);
  EXPECT_EQ(c.schedulers[0], SchedulerKind::kMlwdf);
  EXPECT_EQ(c.binning().size(), 2);
  EXPECT_EQ(c.num_users(), 4);
  EXPECT_TRUE(c.auction.monotone_values);
  ASSERT_TRUE(c.sweep);
  EXPECT_EQ(c.sweep->groups, std::vector<int>{2});
  EXPECT_EQ(c.sweep->points(), 2u);
}

struct BadCase {
  const char* text;
  int line;
  const char* field;
};

TEST(ConfigParse, ErrorsNameLineAndField) {
  const BadCase cases[] = {
      {"[scenario]\nname = a\n[bogus]\n", 3, "bogus"},
      {"[group.1]\nusers = 1\ncolour = red\n", 3, "group.1.colour"},
      {"[group.1]\nusers = 1\nusers = 2\n", 3, "group.1.users"},
      {"[group.1]\nusers = two\n", 2, "group.1.users"},
      {"[group.1]\n[system]\nbuffer = 1.5\n", 3, "system.buffer"},
      {"[group.1]\n[auction]\nmonotone_values = yes\n", 3, "auction.monotone_values"},
      {"[group.1]\n[group.1]\n", 2, "group.1"},
      {"[group.1]\n[group.3]\n", 2, "group.3"},
      {"[group.x]\n", 1, "group.x"},
      {"[scenario]\nschedulers = auction, fifo\n[group.1]\n", 2, "scenario.schedulers"},
      {"[group.1]\n[sweep]\nlatency = 1\n", 3, "sweep.latency"},
      {"[group.1]\n[calibration]\npeak_powers = 1,,2\n", 3, "calibration.peak_powers"},
      {"users = 1\n", 1, ""},
      {"[group.1\n", 1, ""},
      {"[group.1]\nusers\n", 2, ""},
  };
  for (const auto& bc : cases) {
    try {
      parse_scenario(bc.text);
      ADD_FAILURE() << "accepted:\n" << bc.text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.line(), bc.line) << bc.text;
      EXPECT_EQ(e.field(), bc.field) << bc.text;
      EXPECT_NE(std::string(e.what()).find("line " + std::to_string(bc.line)), std::string::npos);
    }
  }
}

TEST(ConfigParse, SemanticErrorsNameTheField) {
  const std::pair<const char*, const char*> cases[] = {
      {"[group.1]\nusers = 0\n", "group.1.users"},
      {"[scenario]\nhorizon = 10\nwarmup = 10\n[group.1]\n", "scenario.warmup"},
      {"[group.1]\n[sweep]\ndelay_ms = 1, 2\npeak_power = 3\n", "sweep.peak_power"},
      {"[group.1]\n[sweep]\ngroups = 2\ndelay_ms = 1\n", "sweep.groups"},
      {"[group.1]\nusers = 2\n[joint]\ngamma = 1\n", "joint.gamma"},
      {"[group.1]\n[oracle]\nfailure_prob = 1\n", "oracle.failure_prob"},
      {"[scenario]\nruns = 0\n[group.1]\n", "scenario.runs"},
      {"[scenario]\n", "group.1"},
  };
  for (const auto& [text, field] : cases) {
    try {
      parse_scenario(text);
      ADD_FAILURE() << "accepted:\n" << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << text;
    }
  }
}

TEST(ConfigParse, EmptySweepHasNoPoints) {
  const ScenarioConfig c = parse_scenario("[group.1]\n[sweep]\ndelay_ms =\n");
  ASSERT_TRUE(c.sweep);
  EXPECT_EQ(c.sweep->points(), 0u);
}

// Random valid configurations survive serialize -> parse unchanged.
class ConfigGen {
 public:
  explicit ConfigGen(std::uint64_t seed) : g_(seed) {}

  ScenarioConfig next() {
    ScenarioConfig c;
    c.name = "cfg" + std::to_string(uni(0, 9999));
    c.schedulers.clear();
    const SchedulerKind kinds[] = {SchedulerKind::kAuction, SchedulerKind::kJointOptimal,
                                   SchedulerKind::kMlwdf};
    for (auto k : kinds) {
      if (coin()) c.schedulers.push_back(k);
    }
    if (c.schedulers.empty()) c.schedulers.push_back(SchedulerKind::kMlwdf);
    c.runs = uni(1, 50);
    c.seed_base = g_();
    c.horizon = uni(1, 1000000);
    c.warmup = uni(0, static_cast<int>(c.horizon) - 1);
    c.buffer = uni(1, 200);
    c.frame_ms = real(0.1, 5);
    c.power.peak_power = real(0.5, 10);
    c.power.n0w = real(0.1, 3);
    c.power.symbols_per_slot = real(1e3, 1e5);
    c.power.max_rate_fragments = uni(1, 12);
    if (coin()) {
      const int n = uni(1, 5);
      double b = real(-20, -10);
      c.channel_levels_db.push_back(b - real(0.1, 3));
      for (int i = 0; i < n; ++i) {
        c.channel_boundaries_db.push_back(b);
        c.channel_levels_db.push_back(b + real(0.0, 1.0));
        b += real(1.1, 4);
      }
    }
    c.pareto_shape = real(1.05, 3);
    c.pareto_mode_bits = real(500, 3000);
    c.pareto_cutoff_bits = c.pareto_mode_bits + real(100, 20000);
    const int groups = uni(1, 4);
    for (int k = 0; k < groups; ++k) {
      c.groups.push_back(UserGroup{uni(1, 6), real(-10, 10), real(0, 0.5), real(0, 20)});
    }
    for (auto* s : {&c.auction, &c.joint}) {
      s->steps.f_scale = real(0.1, 2);
      s->steps.f_exponent = real(0.51, 0.98);
      s->steps.e_scale = real(0.1, 2);
      s->steps.e_exponent = real(s->steps.f_exponent + 0.01, 1.0);
      s->lambda_max = real(1, 1e4);
      s->monotone_values = coin();
    }
    if (coin()) {
      c.gamma.assign(static_cast<std::size_t>(c.num_users()), 1.0 / c.num_users());
    }
    c.cell_budget = real(1, 1e9);
    if (coin()) {
      SweepSpec sw;
      if (coin()) sw.groups.push_back(uni(1, groups));
      const int points = uni(0, 6);
      const SweepField fields[] = {SweepField::kDelayMs, SweepField::kAlphaDb,
                                   SweepField::kPacketsPerFrame, SweepField::kPeakPower};
      for (auto f : fields) {
        if (!coin() && !sw.columns.empty()) continue;
        SweepColumn col{f, {}};
        for (int p = 0; p < points; ++p) col.values.push_back(real(0, 10));
        sw.columns.push_back(col);
      }
      c.sweep = sw;
    }
    if (coin()) {
      CalibrationSpec cal;
      for (int i = uni(1, 5); i > 0; --i) cal.peak_powers.push_back(real(0.5, 5));
      c.calibration = cal;
    }
    if (coin()) {
      OracleSpec o;
      o.buffer = uni(1, 30);
      o.delay_ms = real(0, 10);
      if (coin()) o.arrival_pmf = {0.25, 0.5, 0.25};
      if (coin()) o.channel_pmf = {real(0, 1)};
      o.failure_prob = real(0, 0.9);
      o.learner_horizon = uni(1, 100000);
      o.learner_runs = uni(0, 10);
      c.oracle = o;
    }
    return c;
  }

 private:
  int uni(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
  bool coin() { return uni(0, 1) == 1; }

  std::mt19937_64 g_;
};

TEST(ConfigProperty, RoundTrip) {
  ConfigGen gen(2026);
  for (int i = 0; i < 500; ++i) {
    const ScenarioConfig c = gen.next();
    ASSERT_NO_THROW(c.validate()) << serialize_scenario(c);
    const std::string text = serialize_scenario(c);
    const ScenarioConfig back = parse_scenario(text);
    ASSERT_EQ(back, c) << text;
    EXPECT_EQ(serialize_scenario(back), text);
  }
}

TEST(ConfigFiles, ShippedConfigsLoadAndRoundTrip) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(UPLINK_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++seen;
    const ScenarioConfig c = load_scenario(entry.path());
    EXPECT_EQ(parse_scenario(serialize_scenario(c)), c) << entry.path();
  }
  EXPECT_GE(seen, 8);
}

TEST(ConfigFiles, MissingFileIsAConfigError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.ini"), ConfigError);
}

}  // namespace
}  // namespace uplink
