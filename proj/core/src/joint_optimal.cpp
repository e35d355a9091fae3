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

#include "uplink/joint_optimal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uplink/errors.hpp"

namespace uplink {

WeightVector::WeightVector(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw ContractViolation("weight vector is empty");
  double sum = 0.0;
  for (double g : gamma_) {
    if (!(g >= 0.0 && g <= 1.0)) throw ContractViolation("weights must lie in [0, 1]");
    sum += g;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractViolation("weights must sum to 1");
}

WeightVector WeightVector::uniform(int users) {
  if (users <= 0) throw ContractViolation("need at least one user");
  return WeightVector(std::vector<double>(static_cast<std::size_t>(users), 1.0 / users));
}

double joint_cost(const WeightVector& gamma, std::span<const double> lambda,
                  std::span<const double> deltas, const JointState& state,
                  JointAction action, const RateTable& rates) {
  const std::size_t n = state.queues.size();
  if (lambda.size() != n || deltas.size() != n || gamma.size() != n ||
      state.levels.size() != n || action.user >= n) {
    throw ContractViolation("joint cost dimensions disagree");
  }
  const int level = state.levels[action.user];
  if (!rates.feasible(level, state.queues[action.user]).contains(action.rate)) {
    throw ContractViolation("infeasible joint action");
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < n; ++j) penalty += lambda[j] * (state.queues[j] - deltas[j]);
  return gamma[action.user] * rates.power(level, action.rate) + penalty;
}

double joint_state_cells(int users, int buffer, int levels) {
  return std::pow(static_cast<double>(buffer + 1), users) *
         std::pow(static_cast<double>(levels), users);
}

JointOptimalLearner::JointOptimalLearner(JointConfig config,
                                         std::shared_ptr<const RateTable> rates)
    : config_(std::move(config)),
      rates_(std::move(rates)),
      gamma_(config_.gamma.empty()
                 ? WeightVector::uniform(std::max<int>(1, static_cast<int>(
                                                             config_.queue_constraints.size())))
                 : WeightVector(config_.gamma)) {
  if (!rates_) throw ContractViolation("joint learner needs a rate table");
  const int n = users();
  if (n == 0) throw ContractViolation("joint learner needs at least one user");
  if (gamma_.size() != static_cast<std::size_t>(n)) {
    throw ContractViolation("one weight per user");
  }
  config_.steps.validate();
  const double cells = joint_state_cells(n, config_.buffer, rates_->levels());
  if (cells > config_.cell_budget) throw GuardRefusal(cells, config_.cell_budget);
  table_.assign(static_cast<std::size_t>(cells), 0.0);
  lambda_.assign(static_cast<std::size_t>(n), 0.0);
  hit_ceiling_.assign(static_cast<std::size_t>(n), 0);
  dropped_.assign(static_cast<std::size_t>(n), 0);
  post_ = JointState{std::vector<int>(n, 0), std::vector<int>(n, 0)};
  pending_ = post_;
  reference_index_ = index(post_);
}

std::size_t JointOptimalLearner::index(const JointState& s) const {
  const std::size_t qr = static_cast<std::size_t>(config_.buffer) + 1;
  const std::size_t lr = static_cast<std::size_t>(rates_->levels());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < s.queues.size(); ++i) {
    idx = (idx * qr + static_cast<std::size_t>(s.queues[i])) * lr +
          static_cast<std::size_t>(s.levels[i]);
  }
  return idx;
}

std::size_t JointOptimalLearner::index_after(const JointState& pre, JointAction a) const {
  const std::size_t qr = static_cast<std::size_t>(config_.buffer) + 1;
  const std::size_t lr = static_cast<std::size_t>(rates_->levels());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < pre.queues.size(); ++i) {
    const int q = pre.queues[i] - (i == a.user ? a.rate : 0);
    idx = (idx * qr + static_cast<std::size_t>(q)) * lr +
          static_cast<std::size_t>(pre.levels[i]);
  }
  return idx;
}

double JointOptimalLearner::bracket(JointAction action) const {
  const StepValues step = config_.steps.at(n_);
  const double cost = joint_cost(gamma_, lambda_, config_.queue_constraints, pending_,
                                 action, *rates_);
  return (1.0 - step.f) * table_[index(post_)] +
         step.f * (cost + table_[index_after(pending_, action)] - table_[reference_index_]);
}

JointAction JointOptimalLearner::choose_action(std::span<const int> arrivals,
                                               std::span<const ChannelState> channels) {
  const std::size_t n = static_cast<std::size_t>(users());
  if (arrivals.size() != n || channels.size() != n) {
    throw ContractViolation("one arrival count and channel per user");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int total = post_.queues[i] + arrivals[i];
    pending_.queues[i] = std::min(total, config_.buffer);
    dropped_[i] += total - pending_.queues[i];
    pending_.levels[i] = channels[i].level_index;
  }
  JointAction best{0, 0};
  double best_value = bracket(best);
  for (std::size_t i = 0; i < n; ++i) {
    const RateRange feasible = rates_->feasible(pending_.levels[i], pending_.queues[i]);
    for (int u = 1; u <= feasible.max; ++u) {
      const JointAction a{i, u};
      const double v = bracket(a);
      if (v < best_value) {
        best_value = v;
        best = a;
      }
    }
  }
  if (!std::isfinite(best_value)) throw ContractViolation("joint table went non-finite");
  chosen_ = best;
  has_pending_ = true;
  return best;
}

void JointOptimalLearner::update() {
  if (!has_pending_) throw ContractViolation("update without a pending decision");
  const StepValues step = config_.steps.at(n_);
  const double cost =
      joint_cost(gamma_, lambda_, config_.queue_constraints, pending_, chosen_, *rates_);
  const std::size_t next = index_after(pending_, chosen_);
  double& entry = table_[index(post_)];
  const double target = cost + table_[next] - table_[reference_index_];
  entry = (1.0 - step.f) * entry + step.f * target;

  for (std::size_t j = 0; j < lambda_.size(); ++j) {
    const double drift = pending_.queues[j] - config_.queue_constraints[j];
    const double raised = lambda_[j] + step.e * drift;
    if (raised > config_.lambda_max) hit_ceiling_[j] = 1;
    lambda_[j] = std::clamp(raised, 0.0, config_.lambda_max);
  }
  post_ = pending_;
  post_.queues[chosen_.user] -= chosen_.rate;
  has_pending_ = false;
  ++n_;
}

namespace {

JointConfig make_joint_config(const SimConfig& config, const JointParams& params) {
  JointConfig jc;
  jc.buffer = config.buffer;
  for (const auto& u : config.users) jc.queue_constraints.push_back(u.queue_constraint());
  jc.gamma = params.gamma;
  jc.steps = params.steps;
  jc.lambda_max = params.lambda_max;
  jc.cell_budget = params.cell_budget;
  return jc;
}

}  // namespace

JointOptimalScheduler::JointOptimalScheduler(const SimConfig& config, JointParams params)
    : learner_(make_joint_config(config, params),
               std::make_shared<const RateTable>(config.power, config.binning)) {}

Decision JointOptimalScheduler::observe(const FrameView& view) {
  const JointAction a = learner_.choose_action(view.arrivals, view.channels);
  for (std::size_t i = 0; i < view.queues.size(); ++i) {
    if (learner_.pending_state().queues[i] != view.queues[i]) {
      throw InvariantBreach(view.frame, "joint learner queue diverged from the buffer");
    }
  }
  Decision d;
  d.bids.assign(view.queues.size(), 0);
  if (a.rate > 0) {
    d.bids[a.user] = a.rate;
    d.winner = a.user;
    d.rate = a.rate;
  }
  return d;
}

void JointOptimalScheduler::notify(const Decision&) { learner_.update(); }

std::vector<std::string> JointOptimalScheduler::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < learner_.lambdas().size(); ++i) {
    if (learner_.hit_ceiling(i)) {
      out.push_back("user " + std::to_string(i) +
                    ": multiplier reached its ceiling; the delay constraint may be infeasible");
    }
  }
  return out;
}

SchedulerFactory joint_optimal_factory(JointParams params) {
  return [params](const SimConfig& cfg, std::uint64_t) -> std::unique_ptr<SchedulerPort> {
    return std::make_unique<JointOptimalScheduler>(cfg, params);
  };
}

}  // namespace uplink
