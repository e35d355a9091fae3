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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uplink/engine.hpp"
#include "uplink/learner.hpp"
#include "uplink/rng.hpp"

namespace uplink {

struct Bid {
  std::size_t user = 0;
  int rate = 0;
  double power_if_scheduled = 0.0;
};

struct AuctionOutcome {
  std::optional<std::size_t> winner;
  std::vector<std::uint8_t> success;  // I^i, at most one set
};

// Per-frame signalling in bits: one channel index down and one rate up per
// user, each wide enough for the configured number of levels/rates.
struct SignalingBudget {
  int downlink_bits_per_user = 0;
  int uplink_bits_per_user = 0;

  int total_bits(int users) const {
    return users * (downlink_bits_per_user + uplink_bits_per_user);
  }
};

SignalingBudget signaling_budget(int channel_levels, int max_rate);

// Each learner bids from its own (queue, channel) only.
std::vector<Bid> collect_bids(std::span<RateLearner> learners,
                              std::span<const int> arrivals,
                              std::span<const ChannelState> channels);

// Highest rate wins; equal maxima are broken uniformly at random. All-zero
// bids leave the slot idle.
AuctionOutcome select_user(std::span<const Bid> bids, Rng& rng);

struct FrameCharge {
  double power = 0.0;         // charged to the winner only
  std::vector<int> queues;    // post-decision queue of each learner
};

// Runs every learner's update with its own success flag and bid rate.
FrameCharge apply_outcome(std::span<RateLearner> learners, const AuctionOutcome& outcome,
                          std::span<const Bid> bids);

struct AuctionParams {
  StepSchedule steps;
  double lambda_max = 1000.0;
  bool monotone_values = false;
};

class AuctionScheduler : public SchedulerPort {
 public:
  AuctionScheduler(const SimConfig& config, AuctionParams params, std::uint64_t seed);

  std::string name() const override { return "auction"; }
  Decision observe(const FrameView& view) override;
  void notify(const Decision& decision) override;
  std::vector<std::string> warnings() const override;

  std::span<const RateLearner> learners() const noexcept { return learners_; }
  std::span<const Bid> last_bids() const noexcept { return bids_; }

 private:
  std::shared_ptr<const RateTable> rates_;
  std::vector<RateLearner> learners_;
  std::vector<Bid> bids_;
  AuctionOutcome outcome_;
  Rng rng_;
};

SchedulerFactory auction_factory(AuctionParams params);

}  // namespace uplink
