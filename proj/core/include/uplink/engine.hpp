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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uplink/models.hpp"

namespace uplink {

struct UserParams {
  double alpha = 1.0;  // mean linear channel gain
  TrafficModel traffic;
  double delay_constraint = 0.0;  // frames; 0 for schedulers that ignore it

  // delta-bar = mean fragment arrival rate * delay constraint
  double queue_constraint() const {
    return traffic.mean_fragments_per_frame() * delay_constraint;
  }

  friend bool operator==(const UserParams&, const UserParams&) = default;
};

struct SimConfig {
  std::vector<UserParams> users;
  ChannelBinning binning = ChannelBinning::eight_level();
  PowerModel power;
  int buffer = 100;  // fragments
  std::int64_t horizon = 100000;
  std::int64_t warmup = 0;
  bool record_trace = false;

  int num_users() const noexcept { return static_cast<int>(users.size()); }
  void validate() const;
};

// What a scheduler sees at the start of a frame, after the channel has been
// revealed and the frame's arrivals have joined the queues.
struct FrameView {
  std::int64_t frame = 0;
  std::span<const ChannelState> channels;
  std::span<const int> arrivals;  // accepted fragments this frame
  std::span<const int> queues;    // pre-decision queue lengths
  std::span<const std::int64_t> hol_wait;  // frames the head-of-line fragment has waited
};

struct Decision {
  std::vector<int> bids;  // per-user rate offered, or the rate the scheduler would use
  std::optional<std::size_t> winner;  // empty when the slot idles
  int rate = 0;  // fragments the winner transmits
};

// Uniform scheduler interface driven by the frame loop.
class SchedulerPort {
 public:
  virtual ~SchedulerPort() = default;
  virtual std::string name() const = 0;
  virtual Decision observe(const FrameView& view) = 0;
  virtual void notify(const Decision& decision) = 0;
  // Conditions worth surfacing after a run, e.g. a multiplier pinned at its
  // ceiling.
  virtual std::vector<std::string> warnings() const { return {}; }
};

using SchedulerFactory =
    std::function<std::unique_ptr<SchedulerPort>(const SimConfig&, std::uint64_t seed)>;

struct UserFrame {
  int queue = 0;
  int level = 0;
  int bid = 0;
  bool scheduled = false;
  double power = 0.0;
  int drops = 0;
};

struct FrameRecord {
  std::int64_t frame = 0;
  std::vector<UserFrame> users;
};

struct UserMetrics {
  double avg_power = 0.0;             // Watts, rate-dependent accounting
  double avg_power_peak_charge = 0.0;  // Watts, P-hat charged per scheduled frame
  double avg_queue = 0.0;             // fragments, pre-decision
  double avg_packet_delay = 0.0;      // frames, per-packet mean of its fragments
  double avg_fragment_delay = 0.0;    // frames, fragment-weighted
  double arrival_rate = 0.0;          // accepted fragments per measured frame
  double max_power = 0.0;
  std::int64_t arrived = 0;      // fragments offered (whole run)
  std::int64_t transmitted = 0;  // whole run
  std::int64_t dropped = 0;      // whole run
  std::int64_t final_queue = 0;
  std::int64_t packets_delivered = 0;
  std::int64_t scheduled_frames = 0;

  friend bool operator==(const UserMetrics&, const UserMetrics&) = default;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  std::int64_t first_frame = 0;  // first frame counted in the averages
  std::int64_t last_frame = 0;   // one past the last
  std::vector<UserMetrics> users;
  double total_energy = 0.0;  // Joules (unit frames), whole measured window
  std::int64_t idle_frames = 0;
  std::vector<std::string> warnings;

  double sum_power() const;
  double mean_power() const;
  double mean_packet_delay() const;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<FrameRecord> trace;
};

RunResult run(const SimConfig& config, SchedulerPort& scheduler, std::uint64_t seed);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct UserSummary {
  Summary power;
  Summary power_peak_charge;
  Summary queue;
  Summary packet_delay;
  Summary fragment_delay;
  Summary drops;
};

struct BatchResult {
  std::vector<RunMetrics> runs;  // in the order of the seed list
  std::vector<UserSummary> users;
  Summary sum_power;
  Summary mean_packet_delay;
};

// Runs one independent simulation per seed (up to `jobs` concurrently) and
// aggregates componentwise. A failing run aborts the batch; the error message
// names the seed.
BatchResult run_batch(const SimConfig& config, const SchedulerFactory& factory,
                      std::span<const std::uint64_t> seeds, int jobs = 1);

Summary summarize(std::span<const double> values);

}  // namespace uplink
