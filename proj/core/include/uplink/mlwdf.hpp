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

#include "uplink/engine.hpp"
#include "uplink/rng.hpp"

namespace uplink {

// Largest rate sustainable at peak power, capped by the buffer.
int mlwdf_rate(ChannelState x, int queue, const RateTable& rates);

// argmax_j hol_wait[j] * rates[j], uniform random among ties. When every
// product is zero but some rate is positive (all head-of-line fragments
// arrived this frame) the largest rate wins instead.
std::optional<std::size_t> mlwdf_select(std::span<const std::int64_t> hol_wait,
                                        std::span<const int> rates, Rng& rng);

class MlwdfScheduler : public SchedulerPort {
 public:
  MlwdfScheduler(const SimConfig& config, std::uint64_t seed);

  std::string name() const override { return "mlwdf"; }
  Decision observe(const FrameView& view) override;
  void notify(const Decision&) override {}

 private:
  std::shared_ptr<const RateTable> rates_;
  Rng rng_;
};

SchedulerFactory mlwdf_factory();

}  // namespace uplink
