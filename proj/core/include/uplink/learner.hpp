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
#include <vector>

#include "uplink/models.hpp"
#include "uplink/step_schedule.hpp"

namespace uplink {

// Non-negative multiplier projected into [0, ceiling] after every step.
class LagrangeMultiplier {
 public:
  explicit LagrangeMultiplier(double ceiling = 1000.0, double initial = 0.0);

  double value() const noexcept { return value_; }
  double ceiling() const noexcept { return ceiling_; }
  // True once any update has been clipped at the ceiling.
  bool hit_ceiling() const noexcept { return hit_ceiling_; }

  // value <- clamp(value + step * drift, 0, ceiling)
  void step(double step, double drift);

 private:
  double ceiling_;
  double value_;
  bool hit_ceiling_ = false;
};

struct PostDecisionState {
  int queue = 0;
  int level = 0;

  friend bool operator==(const PostDecisionState&, const PostDecisionState&) = default;
};

// Relative value function over post-decision states (q, x), q in [0, B].
class ValueTable {
 public:
  ValueTable(int buffer, int levels, PostDecisionState reference = {});

  int buffer() const noexcept { return buffer_; }
  int levels() const noexcept { return levels_; }
  PostDecisionState reference() const noexcept { return reference_; }

  double operator()(int q, int level) const { return v_[index(q, level)]; }
  double& operator()(int q, int level) { return v_[index(q, level)]; }
  double reference_value() const { return (*this)(reference_.queue, reference_.level); }

  const std::vector<double>& entries() const noexcept { return v_; }
  bool all_finite() const;

  friend bool operator==(const ValueTable&, const ValueTable&) = default;

 private:
  std::size_t index(int q, int level) const {
    return static_cast<std::size_t>(q) * levels_ + level;
  }

  int buffer_;
  int levels_;
  PostDecisionState reference_;
  std::vector<double> v_;
};

struct LearnerConfig {
  int buffer = 10;
  double queue_constraint = 0.0;  // delta-bar, fragments
  StepSchedule steps;
  double lambda_max = 1000.0;
  PostDecisionState reference{};
  // After each update, clip the rest of the updated channel column so the
  // table stays non-decreasing in the queue length. Off by default.
  bool monotone_values = false;
};

// c(lambda, q, x, I, u) = P(x, I*u) + lambda * (q - delta)
inline double lagrangian_cost(double power, double lambda, int queue,
                              double queue_constraint) {
  return power + lambda * (queue - queue_constraint);
}

// Online primal-dual rate allocation for one user. Each frame runs
// choose_rate (bid assuming the transmission succeeds) followed by update
// (learn from what actually happened). A losing bidder is updated as a
// failed transmission.
class RateLearner {
 public:
  RateLearner(LearnerConfig config, std::shared_ptr<const RateTable> rates);

  // Absorbs the frame's arrivals (clamped at the buffer; the excess is
  // counted as dropped) and returns the argmin rate for the new channel.
  int choose_rate(int arrivals, ChannelState channel);

  // Evaluates the rate-determination bracket for rate v at the pending state.
  double bracket(int v) const;

  void update(bool success, int rate);

  const LearnerConfig& config() const noexcept { return config_; }
  const ValueTable& table() const noexcept { return table_; }
  ValueTable& mutable_table() noexcept { return table_; }
  const LagrangeMultiplier& multiplier() const noexcept { return lambda_; }
  double lambda() const noexcept { return lambda_.value(); }
  void set_lambda(double value) { lambda_ = LagrangeMultiplier(config_.lambda_max, value); }
  std::int64_t iteration() const noexcept { return n_; }
  PostDecisionState post_decision_state() const noexcept { return post_; }
  // Pre-decision queue and channel of the current frame.
  int pending_queue() const noexcept { return pending_queue_; }
  int pending_level() const noexcept { return pending_level_; }
  bool has_pending() const noexcept { return pending_; }
  std::int64_t dropped() const noexcept { return dropped_; }
  const RateTable& rates() const noexcept { return *rates_; }

 private:
  LearnerConfig config_;
  std::shared_ptr<const RateTable> rates_;
  ValueTable table_;
  LagrangeMultiplier lambda_;
  std::int64_t n_ = 1;
  PostDecisionState post_{};
  bool pending_ = false;
  int pending_queue_ = 0;
  int pending_level_ = 0;
  int pending_rate_ = 0;
  std::int64_t dropped_ = 0;
};

}  // namespace uplink
