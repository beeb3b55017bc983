#include "gmfs/execution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gmfs/errors.hpp"
#include "gmfs/parallel.hpp"
#include "gmfs/rng.hpp"
#include "gmfs/sampler.hpp"

namespace gmfs {

Policy::Policy(std::shared_ptr<const QTable> q)
    : q_(std::move(q)), marginal_(q_ ? q_->n_states() : 1, q_ ? q_->kappa() : 1) {
  if (!q_) throw DomainError("policy needs a Q-table");
  const std::size_t ns = q_->n_states();
  const std::size_t na = q_->n_actions();
  const std::size_t n_g = static_cast<std::size_t>(marginal_.total());
  greedy_.resize(ns * n_g);
  std::unique_ptr<FiberIndex> fibers;
  if (q_->mode() == Mode::kJoint) fibers = std::make_unique<FiberIndex>(ns, na, q_->kappa());
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t g = 0; g < n_g; ++g) {
      std::size_t best_a = 0;
      double best = 0.0;
      bool first = true;
      for (std::size_t a = 0; a < na; ++a) {
        if (fibers) {
          for (std::uint64_t z : fibers->fiber_of(g)) {
            const double v = (*q_)(s, a, z);
            if (first || v > best) {
              best = v;
              best_a = a;
              first = false;
            }
          }
        } else {
          const double v = (*q_)(s, a, g);
          if (first || v > best) {
            best = v;
            best_a = a;
            first = false;
          }
        }
      }
      greedy_[s * n_g + g] = static_cast<std::uint32_t>(best_a);
    }
  }
}

std::size_t Policy::act_counts(std::size_t s, std::span<const std::uint32_t> counts) const {
  if (s >= n_states()) throw DomainError("state id out of range");
  if (counts.size() != n_states()) throw DimensionError("g_hat must be a histogram over S");
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total != kappa()) throw DomainError("g_hat denominator differs from the policy's kappa");
  return greedy_[s * marginal_.total() + marginal_.rank(counts)];
}

std::size_t Policy::act(std::size_t s, const Histogram& g_hat) const {
  return act_counts(s, g_hat.counts());
}

std::vector<std::uint32_t> round_to_histogram(std::span<const double> pmf, std::uint32_t kappa) {
  std::vector<std::uint32_t> counts(pmf.size(), 0);
  if (pmf.empty()) throw DimensionError("cannot round an empty pmf");
  std::vector<std::pair<double, std::size_t>> rest(pmf.size());
  std::uint32_t assigned = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (pmf[k] < 0.0) throw DomainError("pmf entries must be non-negative");
    const double scaled = pmf[k] * kappa;
    const double whole = std::floor(scaled);
    counts[k] = static_cast<std::uint32_t>(whole);
    assigned += counts[k];
    rest[k] = {scaled - whole, k};
  }
  // Largest remainders first; stable sort keeps lower indices first on ties.
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; assigned < kappa; ++k) {
    ++counts[rest[k % rest.size()].second];
    ++assigned;
  }
  while (assigned > kappa) {
    // Only reachable through rounding when the pmf sums slightly above 1.
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

namespace {

std::vector<std::size_t> initial_states(const InitialStates& init, std::size_t n, std::size_t ns,
                                        std::uint64_t seed) {
  std::vector<std::size_t> states(n);
  switch (init.kind) {
    case InitialStates::Kind::kFixed:
      if (init.state >= ns) throw ConfigError("initial state out of range");
      std::fill(states.begin(), states.end(), init.state);
      break;
    case InitialStates::Kind::kPerAgent:
      if (init.per_agent.size() != n) throw ConfigError("per-agent initial states need n entries");
      for (std::size_t i = 0; i < n; ++i) {
        if (init.per_agent[i] >= ns) throw ConfigError("initial state out of range");
        states[i] = init.per_agent[i];
      }
      break;
    case InitialStates::Kind::kCategorical: {
      if (init.pmf.size() != ns) throw ConfigError("initial pmf needs |S| entries");
      std::vector<double> cdf(ns);
      std::partial_sum(init.pmf.begin(), init.pmf.end(), cdf.begin());
      if (!(std::abs(cdf.back() - 1.0) < 1e-9)) throw ConfigError("initial pmf must sum to 1");
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(StreamTag::kInit, {seed, i});
        states[i] = rng.categorical_cdf(cdf);
      }
      break;
    }
  }
  return states;
}

}  // namespace

EpisodeResult run_episode(const Environment& env, const WeightMatrix& weights,
                          const Policy& policy, const ExecutionSettings& settings,
                          std::uint64_t seed) {
  const std::size_t n = weights.n();
  const std::size_t ns = env.n_states();
  const std::size_t na = env.n_actions();
  const std::uint32_t kappa = settings.kappa;
  if (policy.kappa() != kappa) {
    throw ConfigError("policy was trained for kappa=" + std::to_string(policy.kappa()) +
                      " but execution uses kappa=" + std::to_string(kappa));
  }
  if (policy.n_states() != ns || policy.n_actions() != na) {
    throw DimensionError("policy dimensions do not match the environment");
  }
  if (!(settings.gamma >= 0.0 && settings.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");

  EpisodeResult result;
  result.seed = seed;
  result.tail_bound =
      std::pow(settings.gamma, settings.horizon) * env.reward_bound() / (1.0 - settings.gamma);
  result.stage_rewards.reserve(settings.horizon);

  const NeighborSampler sampler(weights);
  std::vector<std::size_t> states = initial_states(settings.init, n, ns, seed);
  std::vector<std::size_t> actions(n);
  std::vector<std::vector<double>> exact(n, std::vector<double>(ns));
  std::vector<std::vector<double>> sampled(n, std::vector<double>(ns));
  std::vector<std::uint32_t> counts(ns);
  std::vector<std::size_t> draws;
  std::vector<double> pmf(ns);
  std::vector<double> cdf(ns);

  for (std::uint32_t t = 0; t < settings.horizon; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(exact[i].begin(), exact[i].end(), 0.0);
      const auto row = weights.normalized_row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) exact[i][states[j]] += row[j];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(StreamTag::kNeighbors, {seed, i, t});
      sampler.sample_into(i, kappa, rng, draws);
      std::fill(counts.begin(), counts.end(), 0u);
      for (std::size_t j : draws) ++counts[states[j]];
      for (std::size_t x = 0; x < ns; ++x) sampled[i][x] = static_cast<double>(counts[x]) / kappa;
      if (settings.policy_input == AggregateSource::kExact) {
        counts = round_to_histogram(exact[i], kappa);
      }
      actions[i] = policy.act_counts(states[i], counts);
    }
    double stage = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = settings.reward_source == AggregateSource::kExact ? exact[i] : sampled[i];
      stage += env.reward(states[i], actions[i], g);
    }
    stage /= static_cast<double>(n);
    result.stage_rewards.push_back(stage);
    result.discounted_return += std::pow(settings.gamma, t) * stage;
    if (settings.record_trajectory) {
      result.states.push_back(states);
      result.actions.push_back(actions);
    }
    for (std::size_t i = 0; i < n; ++i) {
      env.transition(states[i], actions[i], exact[i], pmf);
      std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
      // Keep rounding in the partial sums from reaching a zero-probability tail.
      std::size_t last = ns - 1;
      while (last > 0 && pmf[last] == 0.0) --last;
      std::fill(cdf.begin() + static_cast<std::ptrdiff_t>(last), cdf.end(), 2.0);
      Rng rng(StreamTag::kTransition, {seed, i, t});
      states[i] = rng.categorical_cdf(cdf);
    }
  }
  return result;
}

PolicySummary evaluate_policy(const Environment& env, const WeightMatrix& weights,
                              const Policy& policy, const ExecutionSettings& settings,
                              std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("evaluate_policy needs at least one seed");
  PolicySummary out;
  out.seeds.assign(seeds.begin(), seeds.end());
  out.returns.resize(seeds.size());
  out.wall_time_ms.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    out.returns[k] = run_episode(env, weights, policy, settings, seeds[k]).discounted_return;
    out.wall_time_ms[k] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  const double k = static_cast<double>(seeds.size());
  double sum = 0.0;
  for (double r : out.returns) sum += r;
  out.mean = sum / k;
  if (seeds.size() > 1) {
    double ss = 0.0;
    for (double r : out.returns) ss += (r - out.mean) * (r - out.mean);
    out.std_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  return out;
}

}  // namespace gmfs
