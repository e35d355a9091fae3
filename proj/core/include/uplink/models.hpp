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

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "uplink/rng.hpp"

namespace uplink {

double db_to_linear(double db);
double linear_to_db(double linear);

// Discrete channel level. `gain` is the linear power gain |H|^2 of the
// level's representative value.
struct ChannelState {
  int level_index = 0;
  double gain = 1.0;

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

// Partition of the positive gain axis into bins. Bin k covers
// [boundaries[k-1], boundaries[k]) with open ends at 0 and +inf, and maps to
// representatives[k]. Representatives sit at the lower edge of their bin
// (the first bin has no lower edge and carries its own value).
class ChannelBinning {
 public:
  ChannelBinning(std::vector<double> boundaries,
                 std::vector<double> representatives);

  // The eight equal-probability bins at a mean gain of -0.08 dB.
  static ChannelBinning eight_level();
  static ChannelBinning from_db(std::span<const double> boundaries_db,
                                std::span<const double> representatives_db);

  int size() const noexcept { return static_cast<int>(representatives_.size()); }
  ChannelState classify(double gain) const;
  ChannelState state(int level_index) const;

  // Probability of each bin when the raw gain is exponential with mean alpha.
  std::vector<double> bin_probabilities(double alpha) const;

  std::span<const double> boundaries() const noexcept { return boundaries_; }
  std::span<const double> representatives() const noexcept {
    return representatives_;
  }

  friend bool operator==(const ChannelBinning&, const ChannelBinning&) = default;

 private:
  std::vector<double> boundaries_;
  std::vector<double> representatives_;
};

// Rayleigh block fading: the power gain is exponential with mean alpha,
// i.i.d. across frames.
struct RayleighFading {
  double alpha = 1.0;

  double sample_gain(Rng& rng) const;
};

ChannelState sample_channel_state(const RayleighFading& fading,
                                  const ChannelBinning& binning, Rng& rng);

// Poisson packet arrivals with truncated-Pareto sizes, cut into fixed-size
// fragments. The Pareto law is conditioned on [mode, cutoff] (density
// renormalised over the interval), which gives a mean of about 3860 bits at
// the default parameters.
struct TrafficModel {
  double mean_packets_per_frame = 0.1;
  double pareto_shape = 1.2;
  double pareto_mode_bits = 2000.0;
  double pareto_cutoff_bits = 10000.0;
  int fragment_bits = 2000;

  void validate() const;

  double sample_packet_bits(Rng& rng) const;
  int fragments_for(double packet_bits) const;

  // P(S <= bits) of the truncated Pareto law.
  double packet_size_cdf(double bits) const;
  double mean_packet_bits() const;
  // pmf[k] = P(packet occupies k fragments); pmf[0] is always 0.
  std::vector<double> fragments_per_packet_pmf() const;
  double mean_fragments_per_packet() const;
  double mean_fragments_per_frame() const;
  // pmf of the fragments arriving in one frame, over {0, ..., cap}; the mass
  // above cap is folded into the last entry.
  std::vector<double> fragments_per_frame_pmf(int cap) const;

  friend bool operator==(const TrafficModel&, const TrafficModel&) = default;
};

struct Arrivals {
  std::int64_t frame = 0;
  int fragments = 0;
  // Fragment count of each packet, in arrival order. Every fragment of the
  // batch is born at `frame`.
  std::vector<int> packet_fragments;
};

Arrivals sample_arrivals(const TrafficModel& traffic, std::int64_t frame,
                         Rng& rng);

// Transmission power needed for reliable delivery:
//   P(x, u) = (W N0 / x) * (2^(u * fragment_bits / symbols_per_slot) - 1)
struct PowerModel {
  double n0w = 1.0;
  double symbols_per_slot = 1e4;
  double peak_power = 3.0;
  int max_rate_fragments = 7;
  int fragment_bits = 2000;

  void validate() const;

  friend bool operator==(const PowerModel&, const PowerModel&) = default;
};

double tx_power(const PowerModel& pm, ChannelState x, int fragments);
int peak_rate(const PowerModel& pm, ChannelState x);

// The contiguous rate set {0, ..., max}.
struct RateRange {
  int max = 0;

  int size() const noexcept { return max + 1; }
  bool contains(int u) const noexcept { return u >= 0 && u <= max; }
};

RateRange feasible_rates(const PowerModel& pm, ChannelState x, int queue);

// Power and peak rate tabulated per channel level, shared read-only by all
// schedulers of a run.
class RateTable {
 public:
  RateTable(const PowerModel& pm, const ChannelBinning& binning);

  int levels() const noexcept { return static_cast<int>(peak_.size()); }
  int max_rate() const noexcept { return max_rate_; }
  double peak_power() const noexcept { return peak_power_; }

  double power(int level, int u) const {
    return power_[static_cast<std::size_t>(level) * (max_rate_ + 1) + u];
  }
  int peak_rate(int level) const { return peak_[level]; }
  RateRange feasible(int level, int queue) const {
    return {std::min(peak_[level], queue)};
  }

 private:
  int max_rate_;
  double peak_power_;
  std::vector<double> power_;
  std::vector<int> peak_;
};

}  // namespace uplink
