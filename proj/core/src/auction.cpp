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

#include "uplink/auction.hpp"

#include <bit>
#include <string>

#include "uplink/errors.hpp"

namespace uplink {

namespace {

int bits_for(int symbols) {
  return symbols <= 1 ? 0 : std::bit_width(static_cast<unsigned>(symbols - 1));
}

}  // namespace

SignalingBudget signaling_budget(int channel_levels, int max_rate) {
  return {bits_for(channel_levels), bits_for(max_rate + 1)};
}

std::vector<Bid> collect_bids(std::span<RateLearner> learners,
                              std::span<const int> arrivals,
                              std::span<const ChannelState> channels) {
  if (arrivals.size() != learners.size() || channels.size() != learners.size()) {
    throw ContractViolation("one arrival count and channel per learner");
  }
  std::vector<Bid> bids(learners.size());
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const int r = learners[i].choose_rate(arrivals[i], channels[i]);
    bids[i] = Bid{i, r, learners[i].rates().power(channels[i].level_index, r)};
  }
  return bids;
}

AuctionOutcome select_user(std::span<const Bid> bids, Rng& rng) {
  if (bids.empty()) throw ContractViolation("auction needs at least one bid");
  AuctionOutcome out;
  out.success.assign(bids.size(), 0);
  int best = 0;
  std::size_t ties = 0;
  for (const Bid& b : bids) {
    if (b.rate > best) {
      best = b.rate;
      ties = 1;
    } else if (b.rate == best && best > 0) {
      ++ties;
    }
  }
  if (best == 0) return out;
  std::size_t pick = 0;
  if (ties > 1) {
    std::uniform_int_distribution<std::size_t> dist(0, ties - 1);
    pick = dist(rng);
  }
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (bids[i].rate != best) continue;
    if (pick == 0) {
      out.winner = i;
      out.success[i] = 1;
      break;
    }
    --pick;
  }
  return out;
}

FrameCharge apply_outcome(std::span<RateLearner> learners, const AuctionOutcome& outcome,
                          std::span<const Bid> bids) {
  if (bids.size() != learners.size() || outcome.success.size() != learners.size()) {
    throw ContractViolation("outcome does not match the learners");
  }
  FrameCharge charge;
  charge.queues.resize(learners.size());
  if (outcome.winner) {
    const std::size_t w = *outcome.winner;
    if (bids[w].rate > learners[w].pending_queue()) {
      throw ContractViolation("winner's rate exceeds its queue");
    }
    charge.power = bids[w].power_if_scheduled;
  }
  for (std::size_t i = 0; i < learners.size(); ++i) {
    learners[i].update(outcome.success[i] != 0, bids[i].rate);
    charge.queues[i] = learners[i].post_decision_state().queue;
  }
  return charge;
}

AuctionScheduler::AuctionScheduler(const SimConfig& config, AuctionParams params,
                                   std::uint64_t seed)
    : rates_(std::make_shared<const RateTable>(config.power, config.binning)),
      rng_(make_stream(seed, 0, StreamPurpose::kScheduler)) {
  learners_.reserve(config.users.size());
  for (const auto& u : config.users) {
    LearnerConfig lc;
    lc.buffer = config.buffer;
    lc.queue_constraint = u.queue_constraint();
    lc.steps = params.steps;
    lc.lambda_max = params.lambda_max;
    lc.monotone_values = params.monotone_values;
    learners_.emplace_back(lc, rates_);
  }
}

Decision AuctionScheduler::observe(const FrameView& view) {
  bids_ = collect_bids(learners_, view.arrivals, view.channels);
  for (std::size_t i = 0; i < learners_.size(); ++i) {
    if (learners_[i].pending_queue() != view.queues[i]) {
      throw InvariantBreach(view.frame, "learner " + std::to_string(i) +
                                            " queue diverged from the buffer");
    }
  }
  outcome_ = select_user(bids_, rng_);
  Decision d;
  d.bids.reserve(bids_.size());
  for (const Bid& b : bids_) d.bids.push_back(b.rate);
  d.winner = outcome_.winner;
  d.rate = d.winner ? bids_[*d.winner].rate : 0;
  return d;
}

void AuctionScheduler::notify(const Decision&) { apply_outcome(learners_, outcome_, bids_); }

std::vector<std::string> AuctionScheduler::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < learners_.size(); ++i) {
    if (learners_[i].multiplier().hit_ceiling()) {
      out.push_back("user " + std::to_string(i) +
                    ": multiplier reached its ceiling; the delay constraint may be infeasible");
    }
  }
  return out;
}

SchedulerFactory auction_factory(AuctionParams params) {
  return [params](const SimConfig& cfg, std::uint64_t seed) -> std::unique_ptr<SchedulerPort> {
    return std::make_unique<AuctionScheduler>(cfg, params, seed);
  };
}

}  // namespace uplink
