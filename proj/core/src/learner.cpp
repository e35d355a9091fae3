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

#include "uplink/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uplink/errors.hpp"

namespace uplink {

LagrangeMultiplier::LagrangeMultiplier(double ceiling, double initial)
    : ceiling_(ceiling), value_(initial) {
  if (!(ceiling > 0.0) || !std::isfinite(ceiling)) {
    throw ContractViolation("multiplier ceiling must be positive and finite");
  }
  if (!(initial >= 0.0 && initial <= ceiling)) {
    throw ContractViolation("initial multiplier outside [0, ceiling]");
  }
}

void LagrangeMultiplier::step(double step, double drift) {
  const double next = value_ + step * drift;
  if (next > ceiling_) hit_ceiling_ = true;
  value_ = std::clamp(next, 0.0, ceiling_);
}

ValueTable::ValueTable(int buffer, int levels, PostDecisionState reference)
    : buffer_(buffer), levels_(levels), reference_(reference) {
  if (buffer < 0 || levels <= 0) throw ContractViolation("bad value table shape");
  if (reference.queue < 0 || reference.queue > buffer || reference.level < 0 ||
      reference.level >= levels) {
    throw ContractViolation("reference state outside the table");
  }
  v_.assign(static_cast<std::size_t>(buffer + 1) * levels, 0.0);
}

bool ValueTable::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
}

RateLearner::RateLearner(LearnerConfig config, std::shared_ptr<const RateTable> rates)
    : config_(config),
      rates_(std::move(rates)),
      table_(config.buffer, rates_ ? rates_->levels() : 1, config.reference),
      lambda_(config.lambda_max) {
  if (!rates_) throw ContractViolation("learner needs a rate table");
  if (!(config_.queue_constraint >= 0.0)) {
    throw ContractViolation("queue constraint must be non-negative");
  }
  config_.steps.validate();
}

double RateLearner::bracket(int v) const {
  const StepValues step = config_.steps.at(n_);
  const double stay = table_(post_.queue, post_.level);
  const double cost = lagrangian_cost(rates_->power(pending_level_, v), lambda_.value(),
                                      pending_queue_, config_.queue_constraint);
  return (1.0 - step.f) * stay +
         step.f * (cost + table_(pending_queue_ - v, pending_level_) -
                   table_.reference_value());
}

int RateLearner::choose_rate(int arrivals, ChannelState channel) {
  if (arrivals < 0) throw ContractViolation("arrivals must be non-negative");
  if (channel.level_index < 0 || channel.level_index >= table_.levels()) {
    throw ContractViolation("channel level outside the value table");
  }
  const int total = post_.queue + arrivals;
  pending_queue_ = std::min(total, config_.buffer);
  dropped_ += total - pending_queue_;
  pending_level_ = channel.level_index;

  const RateRange feasible = rates_->feasible(pending_level_, pending_queue_);
  int best = 0;
  double best_value = bracket(0);
  if (!std::isfinite(best_value)) {
    throw ContractViolation("value table holds a non-finite entry");
  }
  for (int v = 1; v <= feasible.max; ++v) {
    const double value = bracket(v);
    if (!std::isfinite(value)) {
      throw ContractViolation("value table holds a non-finite entry");
    }
    if (value < best_value) {
      best_value = value;
      best = v;
    }
  }
  pending_ = true;
  pending_rate_ = best;
  return best;
}

void RateLearner::update(bool success, int rate) {
  if (!pending_) throw ContractViolation("update without a pending decision");
  const int sent = success ? rate : 0;
  if (rate < 0 || !rates_->feasible(pending_level_, pending_queue_).contains(rate)) {
    throw ContractViolation("rate " + std::to_string(rate) +
                            " is outside the feasible set of the pending state");
  }
  if (sent > pending_queue_) throw ContractViolation("transmission exceeds queue");

  const StepValues step = config_.steps.at(n_);
  const double cost = lagrangian_cost(rates_->power(pending_level_, sent), lambda_.value(),
                                      pending_queue_, config_.queue_constraint);
  const int next_queue = pending_queue_ - sent;
  double& entry = table_(post_.queue, post_.level);
  const double target =
      cost + table_(next_queue, pending_level_) - table_.reference_value();
  entry = (1.0 - step.f) * entry + step.f * target;
  if (config_.monotone_values) {
    const double pivot = entry;
    for (int q = post_.queue + 1; q <= table_.buffer(); ++q) {
      double& above = table_(q, post_.level);
      above = std::max(above, pivot);
    }
    for (int q = 0; q < post_.queue; ++q) {
      double& below = table_(q, post_.level);
      below = std::min(below, pivot);
    }
  }

  lambda_.step(step.e, pending_queue_ - config_.queue_constraint);

  post_ = {next_queue, pending_level_};
  pending_ = false;
  ++n_;
}

}  // namespace uplink
