#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmfs/graphon.hpp"
#include "gmfs/histogram.hpp"
#include "gmfs/rng.hpp"

namespace gmfs {

/// Walker/Vose alias table: O(k) build, O(1) draw. Zero-weight outcomes are
/// dropped at build time so they can never be returned.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights);

  std::size_t sample(Rng& rng) const {
    const std::size_t slot = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[slot] ? outcome_[slot] : outcome_[alias_[slot]];
  }
  std::size_t support_size() const { return outcome_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
  std::vector<std::size_t> outcome_;
};

/// Multiset of kappa neighbor ids drawn i.i.d. from row i of the normalized
/// weights.
struct NeighborSample {
  std::size_t agent = 0;
  std::vector<std::size_t> indices;
};

/// One alias table per weight-matrix row, built once and shared read-only.
class NeighborSampler {
 public:
  explicit NeighborSampler(const WeightMatrix& weights);

  std::size_t n() const { return rows_.size(); }
  NeighborSample sample(std::size_t agent, std::size_t kappa, Rng& rng) const;
  /// Same as sample() but writes into a caller-owned buffer.
  void sample_into(std::size_t agent, std::size_t kappa, Rng& rng,
                   std::vector<std::size_t>& out) const;

 private:
  std::vector<AliasTable> rows_;
};

NeighborSample sample_neighbors(const NeighborSampler& sampler, std::size_t agent,
                                std::size_t kappa, Rng& rng);

/// Tally of sampled neighbors' (state, action) pairs; denominator kappa.
Histogram empirical_joint(const NeighborSample& sample, std::span<const std::size_t> states,
                          std::span<const std::size_t> actions, std::size_t n_states,
                          std::size_t n_actions);
/// Tally of sampled neighbors' states; denominator kappa.
Histogram empirical_marginal(const NeighborSample& sample, std::span<const std::size_t> states,
                             std::size_t n_states);

/// Graphon-weighted pmf over S x A of the other agents (the kappa -> inf target).
std::vector<double> exact_aggregate(const WeightMatrix& weights, std::size_t agent,
                                    std::span<const std::size_t> states,
                                    std::span<const std::size_t> actions, std::size_t n_states,
                                    std::size_t n_actions);
/// State marginal of exact_aggregate, computed without actions.
std::vector<double> exact_state_aggregate(const WeightMatrix& weights, std::size_t agent,
                                          std::span<const std::size_t> states,
                                          std::size_t n_states);

/// Importance-weighted neighborhood estimate drawn under a proposal q.
struct HTEstimate {
  std::vector<double> proposal;       // q over agents, q[agent] = 0
  std::vector<std::size_t> draws;     // J^(1..kappa)
  std::vector<double> weights;        // rho^(m) = wbar_{i,J} / q(J)
  std::vector<double> estimate;       // over S x A, may leave the simplex
};

/// `proposal` has length n; its entry for `agent` is ignored. Throws
/// DomainError when q is zero somewhere the weight row is positive.
HTEstimate ht_estimate(const WeightMatrix& weights, std::size_t agent,
                       std::span<const double> proposal, std::size_t kappa,
                       std::span<const std::size_t> states, std::span<const std::size_t> actions,
                       std::size_t n_states, std::size_t n_actions, Rng& rng);

/// Euclidean projection onto the probability simplex. Optional post-step for
/// consumers of HT estimates that need a pmf.
std::vector<double> project_to_simplex(std::span<const double> v);

/// sqrt((|S| ln 2 + ln(2/delta)) / (2 kappa)): with probability >= 1 - delta
/// the empirical pmf of kappa i.i.d. draws is within this TV of the truth.
double tv_concentration_bound(std::size_t n_states, std::size_t kappa, double delta);

}  // namespace gmfs
