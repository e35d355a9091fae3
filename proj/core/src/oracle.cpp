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

#include "uplink/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "uplink/errors.hpp"
#include "uplink/rng.hpp"

namespace uplink {

namespace {

void check_pmf(const std::vector<double>& pmf, const char* what) {
  if (pmf.empty()) throw ContractViolation(std::string(what) + " pmf is empty");
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw ContractViolation(std::string(what) + " pmf has a negative mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ContractViolation(std::string(what) + " pmf does not sum to 1");
  }
}

bool better(double candidate, double incumbent) {
  return candidate < incumbent - 1e-12 * (1.0 + std::abs(incumbent));
}

}  // namespace

ExplicitMdp::ExplicitMdp(int buffer_, std::vector<double> arrival_pmf_,
                         std::vector<double> channel_pmf_, RateTable rates_,
                         double failure_prob_)
    : buffer(buffer_),
      arrival_pmf(std::move(arrival_pmf_)),
      channel_pmf(std::move(channel_pmf_)),
      rates(std::move(rates_)),
      failure_prob(failure_prob_) {
  if (buffer < 0) throw ContractViolation("buffer must be non-negative");
  check_pmf(arrival_pmf, "arrival");
  check_pmf(channel_pmf, "channel");
  if (static_cast<int>(channel_pmf.size()) != rates.levels()) {
    throw ContractViolation("channel pmf needs one entry per level");
  }
  if (!(failure_prob >= 0.0 && failure_prob < 1.0)) {
    throw ContractViolation("failure probability must lie in [0, 1)");
  }
}

double ExplicitMdp::mean_arrivals() const {
  double m = 0.0;
  for (std::size_t a = 0; a < arrival_pmf.size(); ++a) m += static_cast<double>(a) * arrival_pmf[a];
  return m;
}

std::vector<double> ExplicitMdp::kernel_row(int q, int level, int rate) const {
  if (!actions(q, level).contains(rate)) throw ContractViolation("infeasible rate");
  std::vector<double> row(static_cast<std::size_t>(num_states()), 0.0);
  const auto add_branch = [&](int q_after, double weight) {
    if (weight == 0.0) return;
    for (std::size_t a = 0; a < arrival_pmf.size(); ++a) {
      const int qn = std::min(q_after + static_cast<int>(a), buffer);
      for (int x = 0; x < levels(); ++x) {
        row[static_cast<std::size_t>(state_index(qn, x))] +=
            weight * arrival_pmf[a] * channel_pmf[static_cast<std::size_t>(x)];
      }
    }
  };
  add_branch(q - rate, 1.0 - failure_prob);
  add_branch(q, failure_prob);
  return row;
}

RviaSolution solve_rvia(const ExplicitMdp& mdp, double lambda, double queue_constraint,
                        const RviaOptions& options) {
  if (!(lambda >= 0.0)) throw ContractViolation("lambda must be non-negative");
  const int B = mdp.buffer;
  const int L = mdp.levels();
  const double theta = mdp.failure_prob;
  if (options.reference_queue < 0 || options.reference_queue > B ||
      options.reference_level < 0 || options.reference_level >= L) {
    throw ContractViolation("reference state outside the state space");
  }
  const std::size_t S = static_cast<std::size_t>(mdp.num_states());
  const std::size_t ref =
      static_cast<std::size_t>(mdp.state_index(options.reference_queue, options.reference_level));

  RviaSolution sol;
  sol.buffer = B;
  sol.levels = L;
  sol.lambda = lambda;
  sol.queue_constraint = queue_constraint;
  sol.value.assign(S, 0.0);
  sol.policy.assign(S, 0);

  std::vector<double> w(static_cast<std::size_t>(B) + 1);   // E_x' V(q, x')
  std::vector<double> h(static_cast<std::size_t>(B) + 1);   // E_a',x' V(min(q+a', B), x')
  std::vector<double> tv(S);

  auto bellman = [&](const std::vector<double>& v, bool record_policy) {
    for (int q = 0; q <= B; ++q) {
      double acc = 0.0;
      for (int x = 0; x < L; ++x) acc += mdp.channel_pmf[x] * v[mdp.state_index(q, x)];
      w[q] = acc;
    }
    for (int q = 0; q <= B; ++q) {
      double acc = 0.0;
      for (std::size_t a = 0; a < mdp.arrival_pmf.size(); ++a) {
        acc += mdp.arrival_pmf[a] * w[std::min(q + static_cast<int>(a), B)];
      }
      h[q] = acc;
    }
    for (int q = 0; q <= B; ++q) {
      const double holding = lambda * (q - queue_constraint);
      for (int x = 0; x < L; ++x) {
        const RateRange acts = mdp.actions(q, x);
        double best = holding + h[q];
        int best_r = 0;
        for (int r = 1; r <= acts.max; ++r) {
          const double val = holding + (1.0 - theta) * (mdp.rates.power(x, r) + h[q - r]) +
                             theta * h[q];
          if (better(val, best)) {
            best = val;
            best_r = r;
          }
        }
        const std::size_t s = static_cast<std::size_t>(mdp.state_index(q, x));
        tv[s] = best;
        if (record_policy) sol.policy[s] = best_r;
      }
    }
  };

  const double tau = options.damping;
  if (!(tau > 0.0 && tau <= 1.0)) throw ContractViolation("damping must lie in (0, 1]");
  std::vector<double>& v = sol.value;
  double residual = std::numeric_limits<double>::infinity();
  long it = 0;
  while (it < options.max_iterations) {
    bellman(v, false);
    ++it;
    const double offset = tv[ref];
    residual = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double next = tv[s] - offset;
      residual = std::max(residual, std::abs(next - v[s]));
      v[s] = (1.0 - tau) * v[s] + tau * next;
    }
    if (residual < options.tolerance) break;
  }
  if (!(residual < options.tolerance)) throw ConvergenceFailure(it, residual);

  bellman(v, true);
  sol.beta = tv[ref];
  sol.residual = residual;
  sol.iterations = it;
  return sol;
}

PolicyStats evaluate_policy(const ExplicitMdp& mdp, std::span<const int> policy) {
  const int S = mdp.num_states();
  const int L = mdp.levels();
  if (static_cast<int>(policy.size()) != S) throw ContractViolation("policy size mismatch");

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
  for (int q = 0; q <= mdp.buffer; ++q) {
    for (int x = 0; x < L; ++x) {
      const int s = mdp.state_index(q, x);
      const auto row = mdp.kernel_row(q, x, policy[s]);
      for (int t = 0; t < S; ++t) P(s, t) = row[t];
    }
  }

  // Restrict to states reachable from an empty buffer.
  std::vector<char> reach(S, 0);
  std::queue<int> frontier;
  for (int x = 0; x < L; ++x) {
    if (mdp.channel_pmf[x] > 0.0) {
      reach[mdp.state_index(0, x)] = 1;
      frontier.push(mdp.state_index(0, x));
    }
  }
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int t = 0; t < S; ++t) {
      if (P(s, t) > 0.0 && !reach[t]) {
        reach[t] = 1;
        frontier.push(t);
      }
    }
  }
  std::vector<int> idx;
  for (int s = 0; s < S; ++s) if (reach[s]) idx.push_back(s);
  const int R = static_cast<int>(idx.size());

  Eigen::MatrixXd A(R, R);
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) A(i, j) = P(idx[j], idx[i]) - (i == j ? 1.0 : 0.0);
  }
  A.row(R - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(R);
  b(R - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd pi_r;
  if (lu.rank() == R) {
    pi_r = lu.solve(b);
  } else {
    // Several closed classes: Cesaro average from the empty-buffer start.
    Eigen::RowVectorXd cur = Eigen::RowVectorXd::Zero(S);
    for (int x = 0; x < L; ++x) cur(mdp.state_index(0, x)) = mdp.channel_pmf[x];
    Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(S);
    constexpr int kSteps = 200000;
    for (int k = 0; k < kSteps; ++k) {
      avg += cur;
      cur = cur * P;
    }
    avg /= kSteps;
    pi_r.resize(R);
    for (int i = 0; i < R; ++i) pi_r(i) = avg(idx[i]);
  }

  PolicyStats st;
  st.stationary.assign(static_cast<std::size_t>(S), 0.0);
  for (int i = 0; i < R; ++i) st.stationary[idx[i]] = std::max(0.0, pi_r(i));
  const double total = std::accumulate(st.stationary.begin(), st.stationary.end(), 0.0);
  for (double& p : st.stationary) p /= total;

  const double theta = mdp.failure_prob;
  for (int q = 0; q <= mdp.buffer; ++q) {
    for (int x = 0; x < L; ++x) {
      const int s = mdp.state_index(q, x);
      const double p = st.stationary[s];
      if (p == 0.0) continue;
      const int r = policy[s];
      st.avg_power += p * (1.0 - theta) * mdp.rates.power(x, r);
      st.avg_queue += p * q;
      // expected overflow after departures
      for (int branch = 0; branch < 2; ++branch) {
        const double wgt = branch == 0 ? 1.0 - theta : theta;
        const int q_after = branch == 0 ? q - r : q;
        for (std::size_t a = 0; a < mdp.arrival_pmf.size(); ++a) {
          const int over = q_after + static_cast<int>(a) - mdp.buffer;
          if (over > 0) st.drop_rate += p * wgt * mdp.arrival_pmf[a] * over;
        }
      }
    }
  }
  return st;
}

ConstrainedSolution solve_constrained(const ExplicitMdp& mdp, double queue_constraint,
                                      const ConstrainedOptions& options) {
  if (!(queue_constraint >= 0.0)) throw ContractViolation("queue constraint must be >= 0");
  ConstrainedSolution out;

  struct Eval {
    RviaSolution sol;
    PolicyStats stats;
  };
  auto eval = [&](double lambda) {
    Eval e{solve_rvia(mdp, lambda, queue_constraint, options.rvia), {}};
    e.stats = evaluate_policy(mdp, e.sol.policy);
    out.probes.push_back({lambda, e.stats.avg_queue, e.stats.avg_power});
    return e;
  };
  auto feasible = [&](const PolicyStats& s) { return s.avg_queue <= queue_constraint; };
  auto check_monotone = [&] {
    auto probes = out.probes;
    std::sort(probes.begin(), probes.end(),
              [](const LambdaProbe& a, const LambdaProbe& b) { return a.lambda < b.lambda; });
    for (std::size_t k = 1; k < probes.size(); ++k) {
      if (probes[k].avg_queue > probes[k - 1].avg_queue * (1.0 + 1e-9) + 1e-12) {
        std::ostringstream msg;
        msg << "average queue increases with lambda: queue(" << probes[k - 1].lambda
            << ") = " << probes[k - 1].avg_queue << " < queue(" << probes[k].lambda
            << ") = " << probes[k].avg_queue;
        throw std::runtime_error(msg.str());
      }
    }
  };

  Eval lo = eval(0.0);
  if (feasible(lo.stats)) {
    out.lambda_star = 0.0;
    out.mixed_power = lo.stats.avg_power;
    out.feasible = std::move(lo.sol);
    out.feasible_stats = std::move(lo.stats);
    return out;
  }
  Eval hi = eval(options.lambda_max);
  if (!feasible(hi.stats)) {
    std::ostringstream msg;
    msg << "queue constraint " << queue_constraint << " is infeasible: average queue at lambda "
        << options.lambda_max << " is " << hi.stats.avg_queue;
    throw InfeasibleConstraint(msg.str());
  }
  double lo_lambda = 0.0;
  double hi_lambda = options.lambda_max;
  for (int k = 0; k < options.max_bisections; ++k) {
    if (hi_lambda - lo_lambda <= options.lambda_tolerance * std::max(1.0, hi_lambda)) break;
    if (queue_constraint - hi.stats.avg_queue <=
        options.relative_queue_tolerance * queue_constraint) {
      break;
    }
    const double mid = 0.5 * (lo_lambda + hi_lambda);
    Eval m = eval(mid);
    if (feasible(m.stats)) {
      hi = std::move(m);
      hi_lambda = mid;
    } else {
      lo = std::move(m);
      lo_lambda = mid;
    }
  }
  check_monotone();

  out.lambda_star = hi_lambda;
  out.infeasible_lambda = lo_lambda;
  out.infeasible_policy = lo.sol.policy;
  const double q_hi = hi.stats.avg_queue;
  const double q_lo = lo.stats.avg_queue;
  if (q_lo > q_hi) {
    const double w = (q_lo - queue_constraint) / (q_lo - q_hi);
    out.mixed_power = w * hi.stats.avg_power + (1.0 - w) * lo.stats.avg_power;
  } else {
    out.mixed_power = hi.stats.avg_power;
  }
  out.infeasible_stats = std::move(lo.stats);
  out.feasible = std::move(hi.sol);
  out.feasible_stats = std::move(hi.stats);
  return out;
}

MonotonicityReport policy_monotonicity(const RviaSolution& sol) {
  MonotonicityReport rep;
  for (int q = 0; q <= sol.buffer; ++q) {
    for (int x = 0; x < sol.levels; ++x) {
      const int r = sol.rate(q, x);
      if (q + 1 <= sol.buffer) {
        ++rep.pairs;
        if (sol.rate(q + 1, x) >= r) {
          ++rep.non_decreasing;
        } else {
          rep.violations.push_back("q " + std::to_string(q) + "->" + std::to_string(q + 1) +
                                   " at x " + std::to_string(x));
        }
      }
      if (x + 1 < sol.levels) {
        ++rep.pairs;
        if (sol.rate(q, x + 1) >= r) {
          ++rep.non_decreasing;
        } else {
          rep.violations.push_back("x " + std::to_string(x) + "->" + std::to_string(x + 1) +
                                   " at q " + std::to_string(q));
        }
      }
    }
  }
  return rep;
}

LearnerRunStats simulate_learner(const ExplicitMdp& mdp, LearnerConfig config,
                                 std::int64_t horizon, std::uint64_t seed) {
  if (horizon <= 0) throw ContractViolation("horizon must be positive");
  config.buffer = mdp.buffer;
  auto rates = std::make_shared<const RateTable>(mdp.rates);
  RateLearner learner(config, rates);
  Rng arrivals_rng = make_stream(seed, 0, StreamPurpose::kArrivals);
  Rng channel_rng = make_stream(seed, 0, StreamPurpose::kChannel);
  Rng failure_rng = make_stream(seed, 0, StreamPurpose::kFailure);
  std::discrete_distribution<int> arrivals(mdp.arrival_pmf.begin(), mdp.arrival_pmf.end());
  std::discrete_distribution<int> channel(mdp.channel_pmf.begin(), mdp.channel_pmf.end());
  std::bernoulli_distribution fails(mdp.failure_prob);

  LearnerRunStats st;
  double energy = 0.0;
  double queue_sum = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t) {
    const int a = arrivals(arrivals_rng);
    const int level = channel(channel_rng);
    const int r = learner.choose_rate(a, ChannelState{level, 0.0});
    queue_sum += learner.pending_queue();
    bool success = true;
    if (r > 0 && mdp.failure_prob > 0.0 && fails(failure_rng)) {
      success = false;
      ++st.failures;
    }
    if (success) energy += mdp.rates.power(level, r);
    learner.update(success, r);
  }
  st.avg_power = energy / static_cast<double>(horizon);
  st.avg_queue = queue_sum / static_cast<double>(horizon);
  st.final_lambda = learner.lambda();
  st.dropped = learner.dropped();
  st.lambda_hit_ceiling = learner.multiplier().hit_ceiling();
  return st;
}

}  // namespace uplink
