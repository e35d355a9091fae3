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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uplink/learner.hpp"
#include "uplink/models.hpp"

namespace uplink {

// Single-user average-cost MDP with known distributions. States are the
// pre-decision pairs (q, x); index = q * levels + x. From (q, x) under rate r
// the transmission succeeds with probability 1 - failure_prob, after which
//   q' = min(q - I*r + a', B),  a' ~ arrival_pmf,  x' ~ channel_pmf.
struct ExplicitMdp {
  int buffer = 0;
  std::vector<double> arrival_pmf;  // index = fragments
  std::vector<double> channel_pmf;  // one entry per rate-table level
  RateTable rates;
  double failure_prob = 0.0;

  ExplicitMdp(int buffer, std::vector<double> arrival_pmf, std::vector<double> channel_pmf,
              RateTable rates, double failure_prob = 0.0);

  int levels() const noexcept { return rates.levels(); }
  int num_states() const noexcept { return (buffer + 1) * levels(); }
  int state_index(int q, int level) const noexcept { return q * levels() + level; }
  RateRange actions(int q, int level) const { return rates.feasible(level, q); }
  double mean_arrivals() const;

  // Dense distribution over next states.
  std::vector<double> kernel_row(int q, int level, int rate) const;
};

struct RviaOptions {
  double tolerance = 1e-8;
  long max_iterations = 100000;
  double damping = 1.0;  // 1 = plain RVIA; < 1 applies the aperiodicity transform
  int reference_queue = 0;
  int reference_level = 0;
};

struct RviaSolution {
  int buffer = 0;
  int levels = 0;
  double lambda = 0.0;
  double queue_constraint = 0.0;
  std::vector<double> value;  // V(q, x), zero at the reference state
  std::vector<int> policy;    // greedy rate per state
  double beta = 0.0;          // optimal average Lagrangian cost
  double residual = 0.0;
  long iterations = 0;

  int rate(int q, int level) const { return policy[static_cast<std::size_t>(q * levels + level)]; }
};

// Solves V(q,x) = min_r [c(lambda,q,x,r) - beta + E V(q',x')] with
// c = (1-theta) P(x, r) + lambda (q - delta).
RviaSolution solve_rvia(const ExplicitMdp& mdp, double lambda, double queue_constraint,
                        const RviaOptions& options = {});

struct PolicyStats {
  double avg_power = 0.0;
  double avg_queue = 0.0;
  double drop_rate = 0.0;  // fragments per frame lost to overflow
  std::vector<double> stationary;
};

// Long-run averages of a stationary deterministic policy started from an
// empty buffer.
PolicyStats evaluate_policy(const ExplicitMdp& mdp, std::span<const int> policy);

struct LambdaProbe {
  double lambda = 0.0;
  double avg_queue = 0.0;
  double avg_power = 0.0;
};

struct ConstrainedOptions {
  double lambda_max = 1000.0;
  double relative_queue_tolerance = 0.01;
  double lambda_tolerance = 1e-7;
  int max_bisections = 200;
  RviaOptions rvia{};
};

struct ConstrainedSolution {
  double lambda_star = 0.0;
  RviaSolution feasible;  // tightest greedy policy with avg queue <= delta
  PolicyStats feasible_stats;
  std::optional<double> infeasible_lambda;  // other end of the bracket
  std::optional<PolicyStats> infeasible_stats;
  std::vector<int> infeasible_policy;
  // Power of the time-sharing mixture of the two bracket policies that meets
  // the constraint with equality (equals the feasible power without a bracket).
  double mixed_power = 0.0;
  std::vector<LambdaProbe> probes;
};

// Bisection on lambda for the average-queue constraint. Throws
// InfeasibleConstraint when even lambda_max cannot meet it, and
// std::runtime_error when queue(lambda) is not monotone over the probes.
ConstrainedSolution solve_constrained(const ExplicitMdp& mdp, double queue_constraint,
                                      const ConstrainedOptions& options = {});

struct MonotonicityReport {
  int pairs = 0;
  int non_decreasing = 0;
  std::vector<std::string> violations;

  double fraction() const {
    return pairs == 0 ? 1.0 : static_cast<double>(non_decreasing) / pairs;
  }
};

// Checks the greedy rate is non-decreasing in q for fixed x and in x for
// fixed q (levels are ordered by gain).
MonotonicityReport policy_monotonicity(const RviaSolution& solution);

// Runs the online learner against the explicit model: arrivals and channel
// levels are drawn from the pmfs, and a nonzero rate fails (I = 0) with the
// model's failure probability.
struct LearnerRunStats {
  double avg_power = 0.0;
  double avg_queue = 0.0;  // pre-decision
  double final_lambda = 0.0;
  std::int64_t dropped = 0;
  std::int64_t failures = 0;
  bool lambda_hit_ceiling = false;
};

LearnerRunStats simulate_learner(const ExplicitMdp& mdp, LearnerConfig config,
                                 std::int64_t horizon, std::uint64_t seed);

}  // namespace uplink
