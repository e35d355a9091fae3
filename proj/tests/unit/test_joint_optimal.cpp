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

#include <memory>
#include <random>
#include <vector>

#include "uplink/errors.hpp"
#include "uplink/joint_optimal.hpp"

namespace uplink {
namespace {

std::shared_ptr<const RateTable> two_state_rates() {
  const double bounds[] = {3.18};
  const double levels[] = {-8.47, 3.18};
  PowerModel pm;
  pm.peak_power = 3.0;
  return std::make_shared<const RateTable>(pm, ChannelBinning::from_db(bounds, levels));
}

TEST(JointCost, DocumentedExamples) {
  const auto rt = two_state_rates();
  const WeightVector half({0.5, 0.5});
  const std::vector<double> lam{1.0, 1.0}, delta{10.0, 10.0};
  const JointState s{{12, 8}, {1, 0}};
  EXPECT_DOUBLE_EQ(joint_cost(half, lam, delta, s, JointAction{0, 0}, *rt), 0.0);
  EXPECT_DOUBLE_EQ(joint_cost(half, lam, delta, s, JointAction{0, 3}, *rt),
                   0.5 * rt->power(1, 3));
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_DOUBLE_EQ(joint_cost(half, zero, delta, s, JointAction{1, 0}, *rt), 0.0);
  EXPECT_THROW(joint_cost(half, lam, delta, s, JointAction{1, 7}, *rt), ContractViolation);
}

TEST(JointCost, SingleUserReducesToTheLearnerCost) {
  const auto rt = two_state_rates();
  const WeightVector one({1.0});
  const std::vector<double> lam{0.7}, delta{2.5};
  const JointState s{{6}, {1}};
  for (int u = 0; u <= 6; ++u) {
    EXPECT_DOUBLE_EQ(joint_cost(one, lam, delta, s, JointAction{0, u}, *rt),
                     lagrangian_cost(rt->power(1, u), 0.7, 6, 2.5));
  }
}

TEST(JointCost, WeightsAreValidated) {
  EXPECT_THROW(WeightVector({0.5, 0.6}), ContractViolation);
  EXPECT_THROW(WeightVector({-0.1, 1.1}), ContractViolation);
  EXPECT_THROW(WeightVector(std::vector<double>{}), ContractViolation);
  EXPECT_NEAR(WeightVector::uniform(4)[2], 0.25, 1e-15);
}

TEST(JointGuard, CellCount) {
  EXPECT_DOUBLE_EQ(joint_state_cells(2, 10, 2), 484.0);
  EXPECT_DOUBLE_EQ(joint_state_cells(1, 100, 8), 808.0);
  JointConfig cfg;
  cfg.buffer = 100;
  cfg.queue_constraints.assign(4, 1.0);
  PowerModel pm;
  const auto rt = std::make_shared<const RateTable>(pm, ChannelBinning::eight_level());
  try {
    JointOptimalLearner l(cfg, rt);
    FAIL() << "expected a refusal";
  } catch (const GuardRefusal& e) {
    EXPECT_DOUBLE_EQ(e.cells(), joint_state_cells(4, 100, 8));
  }
}

TEST(JointLearner, ZeroTableIdles) {
  JointConfig cfg;
  cfg.queue_constraints = {1.0, 1.0};
  JointOptimalLearner l(cfg, two_state_rates());
  const std::vector<int> a{3, 2};
  const std::vector<ChannelState> ch{ChannelState{1, 2.0}, ChannelState{0, 0.14}};
  EXPECT_EQ(l.choose_action(a, ch), (JointAction{0, 0}));
}

TEST(JointLearner, LambdaStepMirrorsSingleUser) {
  JointConfig cfg;
  cfg.buffer = 20;
  cfg.queue_constraints = {10.0, 10.0};
  cfg.steps.e_scale = 0.01;
  JointOptimalLearner l(cfg, two_state_rates());
  const std::vector<int> a{12, 10};
  const std::vector<ChannelState> ch{ChannelState{0, 0.14}, ChannelState{0, 0.14}};
  l.choose_action(a, ch);
  l.update();
  // Lambdas start at 0; the first user drifts up by 0.01 * 2, the second
  // sits at its constraint.
  EXPECT_NEAR(l.lambdas()[0], 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(l.lambdas()[1], 0.0);
}

// Random tables and states: the chosen action is the argmin of the bracket
// over every (user, rate) pair, and the update changes exactly one entry.
TEST(JointLearnerProperty, MatchesExhaustiveArgminAndTouchesOneEntry) {
  const auto rt = two_state_rates();
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 g(seed);
    JointConfig cfg;
    cfg.buffer = 5;
    cfg.queue_constraints = {1.0, 0.5};
    JointOptimalLearner l(cfg, rt);
    // Random table.
    for (int q0 = 0; q0 <= 5; ++q0)
      for (int q1 = 0; q1 <= 5; ++q1)
        for (int x0 = 0; x0 < 2; ++x0)
          for (int x1 = 0; x1 < 2; ++x1)
            l.value(JointState{{q0, q1}, {x0, x1}}) =
                std::uniform_real_distribution<double>(-2.0, 2.0)(g);
    for (int step = 0; step < 200; ++step) {
      const std::vector<int> a{std::uniform_int_distribution<int>(0, 2)(g),
                               std::uniform_int_distribution<int>(0, 2)(g)};
      const std::vector<ChannelState> ch{
          ChannelState{std::uniform_int_distribution<int>(0, 1)(g), 1.0},
          ChannelState{std::uniform_int_distribution<int>(0, 1)(g), 1.0}};
      const JointState post = l.post_decision_state();
      const JointAction got = l.choose_action(a, ch);
      const JointState& pre = l.pending_state();
      double best = INFINITY;
      for (std::size_t i = 0; i < 2; ++i) {
        for (int u = 0; u <= rt->feasible(pre.levels[i], pre.queues[i]).max; ++u) {
          best = std::min(best, l.bracket(JointAction{i, u}));
        }
      }
      ASSERT_EQ(l.bracket(got), best);
      const auto before = l.entries();
      l.update();
      int changed = 0;
      for (std::size_t k = 0; k < before.size(); ++k) changed += before[k] != l.entries()[k];
      ASSERT_LE(changed, 1);
      for (double lam : l.lambdas()) ASSERT_GE(lam, 0.0);
    }
  }
}

// With one user the joint learner and the single-user learner see the same
// states and must produce identical decisions and tables.
TEST(JointLearnerProperty, SingleUserIsTheRateLearner) {
  const auto rt = two_state_rates();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 g(seed);
    JointConfig jc;
    jc.buffer = 10;
    jc.queue_constraints = {0.8};
    LearnerConfig lc;
    lc.buffer = 10;
    lc.queue_constraint = 0.8;
    JointOptimalLearner joint(jc, rt);
    RateLearner single(lc, rt);
    for (int t = 0; t < 3000; ++t) {
      const int a = std::uniform_int_distribution<int>(0, 3)(g);
      const ChannelState ch{std::uniform_int_distribution<int>(0, 1)(g), 1.0};
      const JointAction ja = joint.choose_action(std::vector<int>{a}, std::vector<ChannelState>{ch});
      const int r = single.choose_rate(a, ch);
      ASSERT_EQ(ja.rate, r) << "seed " << seed << " t " << t;
      joint.update();
      single.update(true, r);
      ASSERT_EQ(joint.entries(), single.table().entries());
      ASSERT_EQ(joint.lambdas()[0], single.lambda());
    }
  }
}

TEST(JointScheduler, RunsInTheEngine) {
  SimConfig c;
  const double bounds[] = {3.18};
  const double levels[] = {-8.47, 3.18};
  c.binning = ChannelBinning::from_db(bounds, levels);
  c.buffer = 10;
  c.horizon = 5000;
  c.record_trace = true;
  for (int i = 0; i < 2; ++i) {
    UserParams u;
    u.alpha = db_to_linear(-0.08);
    u.traffic.mean_packets_per_frame = 0.05;
    u.delay_constraint = 3.0;
    c.users.push_back(u);
  }
  JointOptimalScheduler s(c, JointParams{});
  const RunResult r = run(c, s, 8);
  for (const auto& f : r.trace) {
    int winners = 0;
    for (const auto& u : f.users) {
      winners += u.scheduled;
      ASSERT_LE(u.power, c.power.peak_power);
    }
    ASSERT_LE(winners, 1);
  }
  EXPECT_GT(r.metrics.users[0].transmitted, 0);
}

}  // namespace
}  // namespace uplink
