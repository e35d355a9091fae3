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
#include <memory>
#include <span>
#include <vector>

#include "uplink/engine.hpp"
#include "uplink/learner.hpp"
#include "uplink/step_schedule.hpp"

namespace uplink {

struct JointState {
  std::vector<int> queues;
  std::vector<int> levels;

  friend bool operator==(const JointState&, const JointState&) = default;
};

// One user scheduled per frame. Rate 0 means the slot idles, whoever is named.
struct JointAction {
  std::size_t user = 0;
  int rate = 0;

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

// Convex weights over users.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> gamma);
  static WeightVector uniform(int users);

  std::span<const double> values() const noexcept { return gamma_; }
  double operator[](std::size_t i) const { return gamma_[i]; }
  std::size_t size() const noexcept { return gamma_.size(); }

 private:
  std::vector<double> gamma_;
};

// gamma^i P(x^i, u) + sum_j lambda^j (q^j - delta^j) for the action (i, u).
double joint_cost(const WeightVector& gamma, std::span<const double> lambda,
                  std::span<const double> deltas, const JointState& state,
                  JointAction action, const RateTable& rates);

struct JointConfig {
  int buffer = 10;
  std::vector<double> queue_constraints;  // one per user
  std::vector<double> gamma;              // empty means uniform
  StepSchedule steps;
  double lambda_max = 1000.0;
  double cell_budget = 1e7;
};

// Number of post-decision joint states, (B+1)^N * L^N.
double joint_state_cells(int users, int buffer, int levels);

// Online relative value iteration over the joint post-decision state with a
// projected multiplier per user. Only tractable for a handful of users; the
// constructor refuses tables larger than the cell budget.
class JointOptimalLearner {
 public:
  JointOptimalLearner(JointConfig config, std::shared_ptr<const RateTable> rates);

  int users() const noexcept { return static_cast<int>(config_.queue_constraints.size()); }

  JointAction choose_action(std::span<const int> arrivals,
                            std::span<const ChannelState> channels);
  // Bracket value of `action` at the pending state.
  double bracket(JointAction action) const;
  void update();

  const JointState& pending_state() const noexcept { return pending_; }
  const JointState& post_decision_state() const noexcept { return post_; }
  std::span<const double> lambdas() const noexcept { return lambda_; }
  bool hit_ceiling(std::size_t user) const { return hit_ceiling_.at(user) != 0; }
  std::int64_t iteration() const noexcept { return n_; }
  double value(const JointState& post) const { return table_[index(post)]; }
  double& value(const JointState& post) { return table_[index(post)]; }
  const std::vector<double>& entries() const noexcept { return table_; }
  const WeightVector& weights() const noexcept { return gamma_; }
  std::int64_t dropped(std::size_t user) const { return dropped_[user]; }

 private:
  std::size_t index(const JointState& s) const;
  std::size_t index_after(const JointState& pre, JointAction a) const;

  JointConfig config_;
  std::shared_ptr<const RateTable> rates_;
  WeightVector gamma_;
  std::vector<double> table_;
  std::vector<double> lambda_;
  std::vector<std::uint8_t> hit_ceiling_;
  std::int64_t n_ = 1;
  JointState post_;
  JointState pending_;
  JointAction chosen_{};
  bool has_pending_ = false;
  std::size_t reference_index_ = 0;
  std::vector<std::int64_t> dropped_;
};

struct JointParams {
  StepSchedule steps;
  double lambda_max = 1000.0;
  double cell_budget = 1e7;
  std::vector<double> gamma;
};

class JointOptimalScheduler : public SchedulerPort {
 public:
  JointOptimalScheduler(const SimConfig& config, JointParams params);

  std::string name() const override { return "joint-optimal"; }
  Decision observe(const FrameView& view) override;
  void notify(const Decision& decision) override;
  std::vector<std::string> warnings() const override;

  const JointOptimalLearner& learner() const noexcept { return learner_; }

 private:
  JointOptimalLearner learner_;
};

SchedulerFactory joint_optimal_factory(JointParams params);

}  // namespace uplink
