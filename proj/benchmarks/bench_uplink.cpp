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

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "uplink/auction.hpp"
#include "uplink/learner.hpp"
#include "uplink/mlwdf.hpp"
#include "uplink/oracle.hpp"

namespace uplink {
namespace {

std::shared_ptr<const RateTable> rates() {
  return std::make_shared<const RateTable>(PowerModel{}, ChannelBinning::eight_level());
}

void BM_ChooseAndUpdate(benchmark::State& state) {
  const auto rt = rates();
  LearnerConfig cfg;
  cfg.buffer = 100;
  cfg.queue_constraint = 2.5;
  cfg.monotone_values = state.range(0) != 0;
  RateLearner l(cfg, rt);
  Rng rng(1);
  std::uniform_int_distribution<int> arrivals(0, 3), level(0, 7);
  const ChannelBinning bins = ChannelBinning::eight_level();
  for (auto _ : state) {
    const int r = l.choose_rate(arrivals(rng), bins.state(level(rng)));
    l.update(true, r);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_ChooseAndUpdate)->Arg(0)->Arg(1);

// One simulated frame of the N-user auction, channel and traffic included.
void BM_AuctionFrames(benchmark::State& state) {
  SimConfig c;
  for (int i = 0; i < state.range(0); ++i) {
    UserParams u;
    u.alpha = db_to_linear(-0.08);
    u.delay_constraint = 10.0;
    c.users.push_back(u);
  }
  c.horizon = 10000;
  for (auto _ : state) {
    AuctionScheduler s(c, AuctionParams{}, 3);
    benchmark::DoNotOptimize(run(c, s, 3).metrics.total_energy);
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_AuctionFrames)->Arg(2)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MlwdfFrames(benchmark::State& state) {
  SimConfig c;
  for (int i = 0; i < 20; ++i) c.users.emplace_back();
  c.horizon = 10000;
  for (auto _ : state) {
    MlwdfScheduler s(c, 3);
    benchmark::DoNotOptimize(run(c, s, 3).metrics.total_energy);
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_MlwdfFrames)->Unit(benchmark::kMillisecond);

void BM_Rvia(benchmark::State& state) {
  TrafficModel t;
  const int buffer = static_cast<int>(state.range(0));
  const ExplicitMdp mdp(buffer, t.fragments_per_frame_pmf(buffer),
                        ChannelBinning::eight_level().bin_probabilities(db_to_linear(-0.08)),
                        *rates());
  for (auto _ : state) benchmark::DoNotOptimize(solve_rvia(mdp, 0.5, 2.0).beta);
}
BENCHMARK(BM_Rvia)->Arg(10)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace uplink

BENCHMARK_MAIN();
