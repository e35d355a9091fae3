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

#include "uplink/models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "uplink/errors.hpp"

namespace uplink {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

ChannelBinning::ChannelBinning(std::vector<double> boundaries,
                               std::vector<double> representatives)
    : boundaries_(std::move(boundaries)),
      representatives_(std::move(representatives)) {
  if (representatives_.empty()) {
    throw ContractViolation("channel binning needs at least one level");
  }
  if (boundaries_.size() + 1 != representatives_.size()) {
    throw ContractViolation(
        "channel binning needs exactly one boundary fewer than levels");
  }
  for (double r : representatives_) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ContractViolation("channel representative gains must be positive");
    }
  }
  for (std::size_t k = 0; k < boundaries_.size(); ++k) {
    // representatives[k] < boundaries[k] <= representatives[k+1]
    if (!(representatives_[k] < boundaries_[k]) ||
        !(boundaries_[k] <= representatives_[k + 1] * (1.0 + 1e-12))) {
      throw ContractViolation("channel bin " + std::to_string(k) +
                              " is out of order");
    }
  }
}

ChannelBinning ChannelBinning::eight_level() {
  static constexpr double kLevelsDb[] = {-13.0, -8.47, -5.41, -3.28,
                                         -1.59, -0.08, 1.42,  3.18};
  static constexpr double kBoundsDb[] = {-8.47, -5.41, -3.28, -1.59,
                                         -0.08, 1.42,  3.18};
  return from_db(kBoundsDb, kLevelsDb);
}

ChannelBinning ChannelBinning::from_db(std::span<const double> boundaries_db,
                                       std::span<const double> representatives_db) {
  std::vector<double> b;
  std::vector<double> r;
  b.reserve(boundaries_db.size());
  r.reserve(representatives_db.size());
  for (double v : boundaries_db) b.push_back(db_to_linear(v));
  for (double v : representatives_db) r.push_back(db_to_linear(v));
  return ChannelBinning(std::move(b), std::move(r));
}

ChannelState ChannelBinning::classify(double gain) const {
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), gain);
  const int k = static_cast<int>(it - boundaries_.begin());
  return {k, representatives_[k]};
}

ChannelState ChannelBinning::state(int level_index) const {
  if (level_index < 0 || level_index >= size()) {
    throw ContractViolation("channel level index out of range");
  }
  return {level_index, representatives_[level_index]};
}

std::vector<double> ChannelBinning::bin_probabilities(double alpha) const {
  if (!(alpha > 0.0)) throw ContractViolation("alpha must be positive");
  std::vector<double> p(representatives_.size());
  double lower_tail = 1.0;  // P(X >= lower edge)
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double upper_tail =
        k < boundaries_.size() ? std::exp(-boundaries_[k] / alpha) : 0.0;
    p[k] = lower_tail - upper_tail;
    lower_tail = upper_tail;
  }
  return p;
}

double RayleighFading::sample_gain(Rng& rng) const {
  std::exponential_distribution<double> dist(1.0 / alpha);
  return dist(rng);
}

ChannelState sample_channel_state(const RayleighFading& fading,
                                  const ChannelBinning& binning, Rng& rng) {
  if (!(fading.alpha > 0.0)) throw ContractViolation("alpha must be positive");
  return binning.classify(fading.sample_gain(rng));
}

void TrafficModel::validate() const {
  if (!(mean_packets_per_frame >= 0.0) || !std::isfinite(mean_packets_per_frame)) {
    throw ContractViolation("mean packets per frame must be non-negative");
  }
  if (!(pareto_shape > 0.0)) throw ContractViolation("pareto shape must be positive");
  if (!(pareto_mode_bits > 0.0) || !(pareto_cutoff_bits > pareto_mode_bits)) {
    throw ContractViolation("pareto needs 0 < mode < cutoff");
  }
  if (fragment_bits <= 0) throw ContractViolation("fragment size must be positive");
}

double TrafficModel::packet_size_cdf(double bits) const {
  if (bits < pareto_mode_bits) return 0.0;
  if (bits >= pareto_cutoff_bits) return 1.0;
  const double norm =
      1.0 - std::pow(pareto_mode_bits / pareto_cutoff_bits, pareto_shape);
  return (1.0 - std::pow(pareto_mode_bits / bits, pareto_shape)) / norm;
}

double TrafficModel::sample_packet_bits(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double norm =
      1.0 - std::pow(pareto_mode_bits / pareto_cutoff_bits, pareto_shape);
  const double u = unif(rng);
  const double s = pareto_mode_bits / std::pow(1.0 - u * norm, 1.0 / pareto_shape);
  return std::clamp(s, pareto_mode_bits, pareto_cutoff_bits);
}

int TrafficModel::fragments_for(double packet_bits) const {
  return static_cast<int>(std::ceil(packet_bits / fragment_bits));
}

double TrafficModel::mean_packet_bits() const {
  const double k = pareto_shape;
  const double m = pareto_mode_bits;
  const double c = pareto_cutoff_bits;
  const double norm = 1.0 - std::pow(m / c, k);
  if (std::abs(k - 1.0) < 1e-12) return m * std::log(c / m) / norm;
  return k / (k - 1.0) * m * (1.0 - std::pow(m / c, k - 1.0)) / norm;
}

std::vector<double> TrafficModel::fragments_per_packet_pmf() const {
  const int max_frags = fragments_for(pareto_cutoff_bits);
  std::vector<double> pmf(static_cast<std::size_t>(max_frags) + 1, 0.0);
  for (int k = 1; k <= max_frags; ++k) {
    pmf[k] = packet_size_cdf(static_cast<double>(k) * fragment_bits) -
             packet_size_cdf(static_cast<double>(k - 1) * fragment_bits);
  }
  return pmf;
}

double TrafficModel::mean_fragments_per_packet() const {
  const auto pmf = fragments_per_packet_pmf();
  double mean = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) mean += static_cast<double>(k) * pmf[k];
  return mean;
}

double TrafficModel::mean_fragments_per_frame() const {
  return mean_packets_per_frame * mean_fragments_per_packet();
}

std::vector<double> TrafficModel::fragments_per_frame_pmf(int cap) const {
  if (cap < 0) throw ContractViolation("pmf cap must be non-negative");
  const auto packet = fragments_per_packet_pmf();
  const auto width = static_cast<std::size_t>(cap) + 1;
  std::vector<double> pmf(width, 0.0);
  // conv[k] = P(k fragments from the packets counted so far), truncated at cap
  std::vector<double> conv(width, 0.0);
  conv[0] = 1.0;
  double poisson = std::exp(-mean_packets_per_frame);
  double covered = 0.0;
  for (int n = 0; covered < 1.0 - 1e-15 && n < 10000; ++n) {
    for (std::size_t k = 0; k < width; ++k) pmf[k] += poisson * conv[k];
    covered += poisson;
    std::vector<double> next(width, 0.0);
    for (std::size_t k = 0; k < width; ++k) {
      if (conv[k] == 0.0) continue;
      for (std::size_t j = 1; j < packet.size(); ++j) {
        next[std::min(k + j, width - 1)] += conv[k] * packet[j];
      }
    }
    conv = std::move(next);
    poisson *= mean_packets_per_frame / (n + 1);
  }
  double total = 0.0;
  for (double p : pmf) total += p;
  for (double& p : pmf) p /= total;
  return pmf;
}

Arrivals sample_arrivals(const TrafficModel& traffic, std::int64_t frame,
                         Rng& rng) {
  Arrivals out;
  out.frame = frame;
  if (traffic.mean_packets_per_frame <= 0.0) return out;
  std::poisson_distribution<int> count(traffic.mean_packets_per_frame);
  const int packets = count(rng);
  out.packet_fragments.reserve(static_cast<std::size_t>(packets));
  for (int p = 0; p < packets; ++p) {
    const int frags = traffic.fragments_for(traffic.sample_packet_bits(rng));
    out.packet_fragments.push_back(frags);
    out.fragments += frags;
  }
  return out;
}

void PowerModel::validate() const {
  if (!(peak_power > 0.0)) throw ContractViolation("peak power must be positive");
  if (!(symbols_per_slot > 0.0)) {
    throw ContractViolation("symbols per slot must be positive");
  }
  if (!(n0w > 0.0)) throw ContractViolation("W*N0 must be positive");
  if (max_rate_fragments < 0) throw ContractViolation("rate cap must be >= 0");
  if (fragment_bits <= 0) throw ContractViolation("fragment size must be positive");
}

double tx_power(const PowerModel& pm, ChannelState x, int fragments) {
  if (fragments < 0) throw ContractViolation("rate must be non-negative");
  if (!(x.gain > 0.0)) throw ContractViolation("channel gain must be positive");
  if (fragments == 0) return 0.0;
  const double exponent =
      static_cast<double>(fragments) * pm.fragment_bits / pm.symbols_per_slot;
  return pm.n0w / x.gain * (std::exp2(exponent) - 1.0);
}

int peak_rate(const PowerModel& pm, ChannelState x) {
  if (!(pm.peak_power > 0.0)) return 0;
  for (int u = pm.max_rate_fragments; u > 0; --u) {
    if (tx_power(pm, x, u) <= pm.peak_power) return u;
  }
  return 0;
}

RateRange feasible_rates(const PowerModel& pm, ChannelState x, int queue) {
  if (queue < 0) throw ContractViolation("queue must be non-negative");
  return {std::min(peak_rate(pm, x), queue)};
}

RateTable::RateTable(const PowerModel& pm, const ChannelBinning& binning)
    : max_rate_(pm.max_rate_fragments), peak_power_(pm.peak_power) {
  pm.validate();
  const int levels = binning.size();
  power_.resize(static_cast<std::size_t>(levels) * (max_rate_ + 1));
  peak_.resize(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const ChannelState x = binning.state(l);
    for (int u = 0; u <= max_rate_; ++u) {
      power_[static_cast<std::size_t>(l) * (max_rate_ + 1) + u] = tx_power(pm, x, u);
    }
    peak_[l] = uplink::peak_rate(pm, x);
  }
}

}  // namespace uplink
