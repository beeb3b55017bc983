#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gmfs/env.hpp"
#include "gmfs/graphon.hpp"
#include "gmfs/histogram.hpp"
#include "gmfs/qtable.hpp"

namespace gmfs {

/// Greedy decentralized policy read off a Q-table.
///
/// For a local state s and an estimated state marginal g_hat the action is the
/// action component of argmax over (a, z in fiber(g_hat)) in Joint mode, or of
/// argmax over a in Marginal mode. Ties go to the lowest (a, rank(z)).
class Policy {
 public:
  explicit Policy(std::shared_ptr<const QTable> q);
  explicit Policy(QTable q) : Policy(std::make_shared<const QTable>(std::move(q))) {}

  const QTable& table() const { return *q_; }
  std::uint32_t kappa() const { return q_->kappa(); }
  std::size_t n_states() const { return q_->n_states(); }
  std::size_t n_actions() const { return q_->n_actions(); }

  std::size_t act(std::size_t s, const Histogram& g_hat) const;
  /// Same as act() for a count vector over S summing to kappa.
  std::size_t act_counts(std::size_t s, std::span<const std::uint32_t> counts) const;

 private:
  std::shared_ptr<const QTable> q_;
  HistogramIndex marginal_;
  std::vector<std::uint32_t> greedy_;  // [s][rank(g)]
};

inline std::size_t act(const Policy& policy, std::size_t s, const Histogram& g_hat) {
  return policy.act(s, g_hat);
}

struct InitialStates {
  enum class Kind { kFixed, kPerAgent, kCategorical };
  Kind kind = Kind::kFixed;
  std::size_t state = 0;                 // kFixed
  std::vector<std::size_t> per_agent;    // kPerAgent
  std::vector<double> pmf;               // kCategorical, i.i.d. per agent

  static InitialStates fixed(std::size_t s) { return {Kind::kFixed, s, {}, {}}; }
};

/// Which neighborhood aggregate feeds a quantity during execution.
///   kExact:   the graphon-weighted aggregate g_i(t).
///   kSampled: the kappa-neighbor histogram g_hat_i(t).
enum class AggregateSource { kExact, kSampled };

struct ExecutionSettings {
  std::uint32_t kappa = 1;
  std::uint32_t horizon = 100;
  double gamma = 0.95;
  InitialStates init;
  /// Stage rewards (and transitions) see the exact aggregate by default;
  /// kSampled switches only the reward accounting, for ablations.
  AggregateSource reward_source = AggregateSource::kExact;
  /// kExact feeds the policy the exact aggregate rounded to denominator
  /// kappa (the full-information baseline); kSampled is the normal path.
  AggregateSource policy_input = AggregateSource::kSampled;
  bool record_trajectory = false;
};

struct EpisodeResult {
  double discounted_return = 0.0;
  std::vector<double> stage_rewards;
  /// Per step, when recorded: states[t][i] and actions[t][i].
  std::vector<std::vector<std::size_t>> states;
  std::vector<std::vector<std::size_t>> actions;
  std::uint64_t seed = 0;
  /// gamma^horizon * reward_bound / (1 - gamma): bound on the truncated tail.
  double tail_bound = 0.0;
};

/// Rounds a pmf to counts with total kappa by largest remainder; ties go to
/// the lowest index.
std::vector<std::uint32_t> round_to_histogram(std::span<const double> pmf, std::uint32_t kappa);

/// Simulates all n agents for `horizon` steps. Neighbor draws and transitions
/// use streams keyed by (seed, agent, step), so results do not depend on
/// scheduling.
EpisodeResult run_episode(const Environment& env, const WeightMatrix& weights,
                          const Policy& policy, const ExecutionSettings& settings,
                          std::uint64_t seed);

struct PolicySummary {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(#seeds); 0 for one seed
  std::vector<std::uint64_t> seeds;
  std::vector<double> returns;
  std::vector<double> wall_time_ms;
};

PolicySummary evaluate_policy(const Environment& env, const WeightMatrix& weights,
                              const Policy& policy, const ExecutionSettings& settings,
                              std::span<const std::uint64_t> seeds);

}  // namespace gmfs
