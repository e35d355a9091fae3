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

#include "uplink/mlwdf.hpp"

#include <vector>

#include "uplink/errors.hpp"

namespace uplink {

int mlwdf_rate(ChannelState x, int queue, const RateTable& rates) {
  if (queue < 0) throw ContractViolation("queue must be non-negative");
  return rates.feasible(x.level_index, queue).max;
}

namespace {

template <typename Key>
std::optional<std::size_t> argmax_random(std::span<const Key> keys, Rng& rng) {
  Key best{};
  std::size_t ties = 0;
  for (const Key& k : keys) {
    if (k > best) {
      best = k;
      ties = 1;
    } else if (k == best && best > Key{}) {
      ++ties;
    }
  }
  if (ties == 0) return std::nullopt;
  std::size_t pick = 0;
  if (ties > 1) pick = std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] != best) continue;
    if (pick-- == 0) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> mlwdf_select(std::span<const std::int64_t> hol_wait,
                                        std::span<const int> rates, Rng& rng) {
  if (hol_wait.size() != rates.size()) {
    throw ContractViolation("one head-of-line wait per rate");
  }
  std::vector<std::int64_t> products(rates.size());
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (hol_wait[j] < 0 || rates[j] < 0) throw ContractViolation("negative wait or rate");
    products[j] = hol_wait[j] * rates[j];
  }
  if (auto w = argmax_random<std::int64_t>(products, rng)) return w;
  return argmax_random<int>(rates, rng);
}

MlwdfScheduler::MlwdfScheduler(const SimConfig& config, std::uint64_t seed)
    : rates_(std::make_shared<const RateTable>(config.power, config.binning)),
      rng_(make_stream(seed, 0, StreamPurpose::kScheduler)) {}

Decision MlwdfScheduler::observe(const FrameView& view) {
  Decision d;
  d.bids.resize(view.queues.size());
  for (std::size_t i = 0; i < view.queues.size(); ++i) {
    d.bids[i] = mlwdf_rate(view.channels[i], view.queues[i], *rates_);
  }
  d.winner = mlwdf_select(view.hol_wait, d.bids, rng_);
  if (d.winner) d.rate = d.bids[*d.winner];
  return d;
}

SchedulerFactory mlwdf_factory() {
  return [](const SimConfig& cfg, std::uint64_t seed) -> std::unique_ptr<SchedulerPort> {
    return std::make_unique<MlwdfScheduler>(cfg, seed);
  };
}

}  // namespace uplink
