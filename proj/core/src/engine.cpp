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

#include "uplink/engine.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "uplink/errors.hpp"
#include "uplink/rng.hpp"

namespace uplink {

void SimConfig::validate() const {
  if (users.empty()) throw ContractViolation("simulation needs at least one user");
  if (buffer < 0) throw ContractViolation("buffer must be non-negative");
  if (horizon < 0 || warmup < 0) throw ContractViolation("horizon and warm-up must be >= 0");
  power.validate();
  for (const auto& u : users) {
    if (!(u.alpha > 0.0)) throw ContractViolation("alpha must be positive");
    if (!(u.delay_constraint >= 0.0)) {
      throw ContractViolation("delay constraint must be non-negative");
    }
    u.traffic.validate();
    if (u.traffic.fragment_bits != power.fragment_bits) {
      throw ContractViolation("traffic and power model disagree on fragment size");
    }
  }
}

double RunMetrics::sum_power() const {
  double s = 0.0;
  for (const auto& u : users) s += u.avg_power;
  return s;
}

double RunMetrics::mean_power() const {
  return users.empty() ? 0.0 : sum_power() / static_cast<double>(users.size());
}

double RunMetrics::mean_packet_delay() const {
  if (users.empty()) return 0.0;
  double s = 0.0;
  for (const auto& u : users) s += u.avg_packet_delay;
  return s / static_cast<double>(users.size());
}

namespace {

struct PacketEntry {
  std::int64_t birth = 0;
  int remaining = 0;
  int delivered = 0;
  double delay_sum = 0.0;
};

struct UserState {
  RayleighFading fading;
  Rng channel_rng;
  Rng arrival_rng;
  std::deque<PacketEntry> packets;
  int queue = 0;

  // measured window
  double queue_sum = 0.0;
  double energy = 0.0;
  double peak_energy = 0.0;
  double fragment_delay_sum = 0.0;
  std::int64_t fragments_delay_counted = 0;
  double packet_delay_sum = 0.0;
  std::int64_t packets_delay_counted = 0;
  std::int64_t accepted_measured = 0;
  double max_power = 0.0;
  std::int64_t scheduled = 0;

  // whole run
  std::int64_t arrived = 0;
  std::int64_t transmitted = 0;
  std::int64_t dropped = 0;
};

}  // namespace

RunResult run(const SimConfig& config, SchedulerPort& scheduler, std::uint64_t seed) {
  config.validate();
  const int n_users = config.num_users();
  const RateTable rates(config.power, config.binning);

  std::vector<UserState> users;
  users.reserve(static_cast<std::size_t>(n_users));
  for (int i = 0; i < n_users; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    UserState& u = users.emplace_back();
    u.fading = RayleighFading{config.users[i].alpha};
    u.channel_rng = make_stream(seed, id, StreamPurpose::kChannel);
    u.arrival_rng = make_stream(seed, id, StreamPurpose::kArrivals);
  }

  std::vector<ChannelState> channels(n_users);
  std::vector<int> arrivals(n_users);
  std::vector<int> queues(n_users);
  std::vector<std::int64_t> hol(n_users);
  std::vector<int> drops(n_users);

  RunResult result;
  if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.horizon));
  std::int64_t idle = 0;

  for (std::int64_t t = 0; t < config.horizon; ++t) {
    const bool measured = t >= config.warmup;

    for (int i = 0; i < n_users; ++i) {
      UserState& u = users[i];
      channels[i] = sample_channel_state(u.fading, config.binning, u.channel_rng);
      const Arrivals batch = sample_arrivals(config.users[i].traffic, t, u.arrival_rng);
      int space = config.buffer - u.queue;
      int accepted = 0;
      for (int frags : batch.packet_fragments) {
        const int take = std::min(frags, space);
        if (take > 0) {
          u.packets.push_back(PacketEntry{t, take, 0, 0.0});
          space -= take;
          accepted += take;
        }
      }
      u.arrived += batch.fragments;
      u.dropped += batch.fragments - accepted;
      u.queue += accepted;
      if (measured) u.accepted_measured += accepted;
      arrivals[i] = accepted;
      drops[i] = batch.fragments - accepted;
      queues[i] = u.queue;
      hol[i] = u.packets.empty() ? 0 : t - u.packets.front().birth;
    }

    const FrameView view{t, channels, arrivals, queues, hol};
    Decision d = scheduler.observe(view);

    if (d.bids.size() != static_cast<std::size_t>(n_users)) {
      throw InvariantBreach(t, scheduler.name() + " returned the wrong number of bids");
    }
    for (int i = 0; i < n_users; ++i) {
      if (!rates.feasible(channels[i].level_index, queues[i]).contains(d.bids[i])) {
        throw InvariantBreach(t, "user " + std::to_string(i) + " bid " +
                                     std::to_string(d.bids[i]) + " outside its feasible set");
      }
    }
    double frame_power = 0.0;
    if (d.winner) {
      const std::size_t w = *d.winner;
      if (w >= static_cast<std::size_t>(n_users)) {
        throw InvariantBreach(t, "winner index out of range");
      }
      if (d.rate <= 0) throw InvariantBreach(t, "winner scheduled with a zero rate");
      if (!rates.feasible(channels[w].level_index, queues[w]).contains(d.rate)) {
        throw InvariantBreach(t, "winner rate " + std::to_string(d.rate) +
                                     " exceeds its queue or peak rate");
      }
      frame_power = rates.power(channels[w].level_index, d.rate);
      if (frame_power > config.power.peak_power * (1.0 + 1e-12)) {
        throw InvariantBreach(t, "frame power exceeds the peak constraint");
      }

      UserState& u = users[w];
      int to_send = d.rate;
      while (to_send > 0) {
        PacketEntry& p = u.packets.front();
        const int take = std::min(to_send, p.remaining);
        const double delay = static_cast<double>(t - p.birth + 1);
        p.remaining -= take;
        p.delivered += take;
        p.delay_sum += delay * take;
        to_send -= take;
        if (measured) {
          u.fragment_delay_sum += delay * take;
          u.fragments_delay_counted += take;
        }
        if (p.remaining == 0) {
          if (measured) {
            u.packet_delay_sum += p.delay_sum / p.delivered;
            ++u.packets_delay_counted;
          }
          u.packets.pop_front();
        }
      }
      u.queue -= d.rate;
      u.transmitted += d.rate;
      if (measured) {
        u.energy += frame_power;
        u.peak_energy += config.power.peak_power;
        u.max_power = std::max(u.max_power, frame_power);
        ++u.scheduled;
      }
    } else if (measured) {
      ++idle;
    }

    scheduler.notify(d);

    if (measured) {
      for (int i = 0; i < n_users; ++i) users[i].queue_sum += queues[i];
    }
    if (config.record_trace) {
      FrameRecord rec{t, std::vector<UserFrame>(static_cast<std::size_t>(n_users))};
      for (int i = 0; i < n_users; ++i) {
        const bool won = d.winner && *d.winner == static_cast<std::size_t>(i);
        rec.users[i] = UserFrame{queues[i], channels[i].level_index, d.bids[i], won,
                                 won ? frame_power : 0.0, drops[i]};
      }
      result.trace.push_back(std::move(rec));
    }
  }

  RunMetrics& m = result.metrics;
  m.seed = seed;
  m.first_frame = std::min(config.warmup, config.horizon);
  m.last_frame = config.horizon;
  m.idle_frames = idle;
  const double frames = static_cast<double>(m.last_frame - m.first_frame);
  m.users.resize(static_cast<std::size_t>(n_users));
  for (int i = 0; i < n_users; ++i) {
    const UserState& u = users[i];
    UserMetrics& um = m.users[i];
    if (frames > 0) {
      um.avg_power = u.energy / frames;
      um.avg_power_peak_charge = u.peak_energy / frames;
      um.avg_queue = u.queue_sum / frames;
      um.arrival_rate = static_cast<double>(u.accepted_measured) / frames;
    }
    if (u.packets_delay_counted > 0) {
      um.avg_packet_delay = u.packet_delay_sum / static_cast<double>(u.packets_delay_counted);
    }
    if (u.fragments_delay_counted > 0) {
      um.avg_fragment_delay =
          u.fragment_delay_sum / static_cast<double>(u.fragments_delay_counted);
    }
    um.max_power = u.max_power;
    um.arrived = u.arrived;
    um.transmitted = u.transmitted;
    um.dropped = u.dropped;
    um.final_queue = u.queue;
    um.packets_delivered = u.packets_delay_counted;
    um.scheduled_frames = u.scheduled;
    m.total_energy += u.energy;
  }
  m.warnings = scheduler.warnings();
  return result;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

BatchResult run_batch(const SimConfig& config, const SchedulerFactory& factory,
                      std::span<const std::uint64_t> seeds, int jobs) {
  if (seeds.empty()) throw ContractViolation("run_batch needs at least one seed");
  config.validate();
  BatchResult out;
  out.runs.resize(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        SimConfig cfg = config;
        cfg.record_trace = false;
        auto sched = factory(cfg, seeds[k]);
        out.runs[k] = run(cfg, *sched, seeds[k]).metrics;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (!errors[k]) continue;
    const std::string prefix = "seed " + std::to_string(seeds[k]) + ": ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const InvariantBreach& e) {
      throw InvariantBreach(e.frame(), prefix + e.detail());
    } catch (const GuardRefusal&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(prefix + e.what());
    }
  }

  const std::size_t n_users = static_cast<std::size_t>(config.num_users());
  out.users.resize(n_users);
  std::vector<double> buf(seeds.size());
  auto collect = [&](auto getter) {
    for (std::size_t k = 0; k < seeds.size(); ++k) buf[k] = getter(out.runs[k]);
    return summarize(buf);
  };
  for (std::size_t i = 0; i < n_users; ++i) {
    UserSummary& us = out.users[i];
    us.power = collect([i](const RunMetrics& r) { return r.users[i].avg_power; });
    us.power_peak_charge =
        collect([i](const RunMetrics& r) { return r.users[i].avg_power_peak_charge; });
    us.queue = collect([i](const RunMetrics& r) { return r.users[i].avg_queue; });
    us.packet_delay =
        collect([i](const RunMetrics& r) { return r.users[i].avg_packet_delay; });
    us.fragment_delay =
        collect([i](const RunMetrics& r) { return r.users[i].avg_fragment_delay; });
    us.drops = collect(
        [i](const RunMetrics& r) { return static_cast<double>(r.users[i].dropped); });
  }
  out.sum_power = collect([](const RunMetrics& r) { return r.sum_power(); });
  out.mean_packet_delay = collect([](const RunMetrics& r) { return r.mean_packet_delay(); });
  return out;
}

}  // namespace uplink
