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
#include <random>

namespace uplink {

using Rng = std::mt19937_64;

// Each (user, purpose) pair owns its own stream so that swapping the
// scheduler never perturbs channel or traffic sample paths.
enum class StreamPurpose : std::uint32_t {
  kChannel = 1,
  kArrivals = 2,
  kScheduler = 3,
  kFailure = 4,
};

Rng make_stream(std::uint64_t master_seed, std::uint32_t user,
                StreamPurpose purpose);

}  // namespace uplink
