#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gmfs/env.hpp"
#include "gmfs/histogram.hpp"
#include "gmfs/qtable.hpp"
#include "gmfs/rng.hpp"

namespace gmfs {

/// Which aggregate a surrogate neighbor sees when it transitions.
///   kLeaveOneOut: the other kappa agents (focal included, itself excluded).
///   kShared:      the focal agent's aggregate g_z.
enum class SurrogateAggregate { kLeaveOneOut, kShared };

/// How neighbor actions are chosen where the table index does not fix them
/// (current actions in Marginal mode, next actions in Joint mode).
///
/// In Joint mode the operators see next actions only through fibers, so the
/// greedy rule keeps them a fixed contraction. In Marginal mode the rule sets
/// the neighbors' current actions and so enters the kernel: greedy actions
/// make the kernel depend on Q and sweeps can cycle, which is why Marginal
/// mode defaults to uniform.
enum class NeighborActionRule { kGreedy, kUniform };

struct SurrogateSettings {
  Mode mode = Mode::kMarginal;
  std::uint32_t kappa = 1;
  double gamma = 0.95;
  SurrogateAggregate aggregate = SurrogateAggregate::kLeaveOneOut;
  /// Unset means greedy in Joint mode and uniform in Marginal mode.
  std::optional<NeighborActionRule> neighbor_actions;
  /// Largest number of atomic outcomes exact_operator may enumerate.
  std::uint64_t exact_cap = 1'000'000;
};

struct SurrogateOutcome {
  std::size_t next_state;
  /// Next state marginal (Marginal mode) or next joint histogram (Joint mode).
  Histogram next_aggregate;
  std::uint64_t next_marginal_rank;
};

/// Maximizer of a fiber backup. `joint_rank` equals the marginal rank in
/// Marginal mode.
struct BackupChoice {
  double value;
  std::size_t action;
  std::uint64_t joint_rank;
};

/// One sampled surrogate transition, as consumed by off-policy learning.
struct Transition {
  std::size_t s;
  std::size_t a;
  std::uint64_t h;  // table rank of z (Joint) or g (Marginal)
  double reward;
  std::size_t next_state;
  std::uint64_t next_marginal_rank;
};

/// The (kappa + 1)-agent surrogate system for one environment and kappa.
///
/// Reward and kernel values at every histogram point are tabulated at
/// construction, so operators never call back into the environment.
class SurrogateModel {
 public:
  SurrogateModel(std::shared_ptr<const Environment> env, SurrogateSettings settings);

  const Environment& env() const { return *env_; }
  std::shared_ptr<const Environment> env_ptr() const { return env_; }
  const SurrogateSettings& settings() const { return settings_; }
  std::size_t n_states() const { return ns_; }
  std::size_t n_actions() const { return na_; }
  std::uint32_t kappa() const { return settings_.kappa; }

  /// All-zero table of the right shape, with gamma and env name filled in.
  QTable make_table() const;
  std::size_t n_histograms() const { return n_hist_; }
  std::uint64_t marginal_rank_of(std::uint64_t h) const { return marginal_of_[h]; }
  const HistogramIndex& marginal_index() const { return marginal_index_; }

  double reward_at(std::size_t s, std::size_t a, std::uint64_t g_rank) const {
    return reward_[(s * na_ + a) * n_g_ + g_rank];
  }
  std::span<const double> kernel_at(std::size_t s, std::size_t a, std::uint64_t g_rank) const {
    return {kernel_.data() + ((s * na_ + a) * n_g_ + g_rank) * ns_, ns_};
  }

  /// max over a' (and, in Joint mode, every z' in the fiber of g').
  BackupChoice fiber_backup(const QTable& q, std::size_t s, std::uint64_t g_rank) const;
  double fiber_backup(const QTable& q, std::size_t s, const Histogram& g) const;

  SurrogateOutcome surrogate_step(const QTable& q, std::size_t s, std::size_t a,
                                  const Histogram& h, Rng& rng) const;
  double empirical_operator(const QTable& q, std::size_t s, std::size_t a, const Histogram& h,
                            std::uint32_t m, Rng& rng) const;
  double exact_operator(const QTable& q, std::size_t s, std::size_t a, const Histogram& h) const;

  /// Atomic outcomes exact_operator enumerates per entry; saturates at 2^64-1.
  std::uint64_t exact_outcome_count() const;

  /// Applies the exact operator to every entry.
  QTable apply_exact(const QTable& q) const;
  /// Applies the empirical operator to every entry; entry e draws from the
  /// stream keyed by (seed, e, realization).
  QTable apply_empirical(const QTable& q, std::uint32_t m, std::uint64_t seed,
                         std::uint64_t realization = 0) const;

  /// Convex update of one entry towards r + gamma * M Q(s', g'). Alpha must lie
  /// in (0, 1]. Returns the new entry value.
  double off_policy_update(QTable& q, const Transition& tr, double alpha) const;

  /// Shared machinery for sweeps, exposed for value iteration.
  struct Context {
    const QTable* q;
    std::vector<double> backup;        // [s][g] fiber backup of q
    std::vector<std::uint32_t> greedy;  // [s][g] its maximizing action
  };
  Context make_context(const QTable& q) const;
  double evaluate_empirical(const Context& ctx, std::size_t entry, std::uint32_t m, Rng& rng,
                            double reward) const;
  double evaluate_exact(const Context& ctx, std::size_t entry) const;
  Transition sample_transition(const QTable& q, std::size_t s, std::size_t a, std::uint64_t h,
                               std::span<const double> next_action_pmf, Rng& rng,
                               std::vector<std::uint32_t>* next_joint = nullptr) const;

  void check_table(const QTable& q) const;

 private:
  const double* kernel_cdf(std::size_t s, std::size_t a, std::uint64_t g_rank) const {
    return kernel_cdf_.data() + ((s * na_ + a) * n_g_ + g_rank) * ns_;
  }
  std::uint64_t neighbor_aggregate(std::size_t focal, std::size_t x, std::uint64_t g_rank) const;
  std::uint64_t entry_to_h(std::size_t entry, std::size_t& s, std::size_t& a) const;
  template <typename ActionFn>
  void neighbor_pmfs(std::size_t s, std::uint64_t h, ActionFn&& greedy_action,
                     std::vector<const double*>& pmfs, std::vector<const double*>& cdfs,
                     std::vector<std::size_t>* states) const;

  std::shared_ptr<const Environment> env_;
  SurrogateSettings settings_;
  std::size_t ns_;
  std::size_t na_;
  HistogramIndex marginal_index_;
  std::unique_ptr<FiberIndex> fibers_;  // Joint mode only
  std::size_t n_g_;
  std::size_t n_hist_;
  std::size_t hist_alphabet_;
  std::vector<std::uint32_t> hist_counts_;  // [h][cell]
  std::vector<std::uint64_t> marginal_of_;  // [h]
  std::vector<double> reward_;              // [s][a][g]
  std::vector<double> kernel_;              // [s][a][g][s']
  std::vector<double> kernel_cdf_;          // [s][a][g][s']
  std::vector<double> mixture_;             // [x][g][s'] uniform-action mixture
  std::vector<double> mixture_cdf_;
  std::vector<std::uint64_t> loo_;          // [focal][x][g] -> aggregate rank
  // Level-wise histogram growth for the exact convolution:
  // grow_[j][r * |S| + x] = rank at level j + 1 of (level-j histogram r) + e_x.
  std::vector<std::vector<std::uint64_t>> grow_;
  std::vector<std::size_t> level_size_;
};

struct ValueIterationOptions {
  std::uint32_t max_sweeps = 250;
  std::uint32_t samples = 50;  // m
  double epsilon = 1e-4;
  std::uint64_t seed = 0;
  /// Use the exact operator instead of sampling.
  bool exact = false;
  /// Draw fresh surrogate samples every sweep instead of reusing each entry's
  /// fixed sample stream. With fresh samples the residual stays at the Monte
  /// Carlo noise level and the epsilon stop rarely triggers.
  bool resample_each_sweep = false;
  std::function<void(std::uint32_t sweep, double residual)> on_sweep;
};

struct ValueIterationResult {
  QTable q;
  std::vector<double> residuals;  // residuals[t] = ||Q^{t+1} - Q^t||
  std::vector<double> sup_norms;  // sup_norms[t] = ||Q^{t+1}||
  std::uint32_t sweeps = 0;
  bool converged = false;
};

/// Synchronous value iteration from the zero table (double-buffered sweeps,
/// parallel across entries).
ValueIterationResult value_iteration(const SurrogateModel& model,
                                     const ValueIterationOptions& options);

/// Value iteration where each entry averages `realizations` independent
/// randomized-operator evaluations, each with its own reward noise and
/// surrogate samples. The model must be built on `env.base_ptr()`.
ValueIterationResult value_iteration_stochastic(const SurrogateModel& model,
                                                const StochasticRewardEnv& env,
                                                std::uint32_t realizations,
                                                const ValueIterationOptions& options);

struct OffPolicyConfig {
  double learning_rate = 0.05;
  /// alpha_t = learning_rate / (1 + t * decay); zero gives a constant rate.
  double decay = 0.0;
  /// Behavior pmf over actions; empty means uniform. Must be strictly positive.
  std::vector<double> behavior;
  std::uint64_t steps = 1'000'000;
  /// Restart from a uniformly random (s, h) every this many steps; 0 never.
  std::uint64_t trajectory_length = 0;
  std::uint64_t seed = 0;
};

/// Q-learning on a single surrogate trajectory under the behavior policy.
/// Neighbor next actions (Joint mode) are drawn from the behavior policy.
QTable off_policy_learning(const SurrogateModel& model, const OffPolicyConfig& config);

/// ceil((25 kappa^2 gamma^2 / (1 - gamma)^4) * r^2 * ln(200 |S|^2 |A|^2 kappa^(|S||A|))),
/// at least 1.
std::uint64_t sample_budget(std::uint32_t kappa, double gamma, double reward_bound,
                            std::size_t n_states, std::size_t n_actions);

}  // namespace gmfs
