#include "gmfs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmfs/errors.hpp"

namespace gmfs {

AliasTable::AliasTable(std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] < 0.0) throw DomainError("alias table weights must be non-negative");
    if (weights[j] > 0.0) {
      outcome_.push_back(j);
      total += weights[j];
    }
  }
  if (outcome_.empty()) throw DomainError("alias table needs a positive weight");
  const std::size_t k = outcome_.size();
  std::vector<double> scaled(k);
  for (std::size_t t = 0; t < k; ++t) scaled[t] = weights[outcome_[t]] * k / total;
  prob_.assign(k, 1.0);
  alias_.resize(k);
  std::iota(alias_.begin(), alias_.end(), 0);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t t = 0; t < k; ++t) (scaled[t] < 1.0 ? small : large).push_back(t);
  while (!small.empty() && !large.empty()) {
    const std::size_t lo = small.back();
    small.pop_back();
    const std::size_t hi = large.back();
    prob_[lo] = scaled[lo];
    alias_[lo] = hi;
    scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0;
    if (scaled[hi] < 1.0) {
      large.pop_back();
      small.push_back(hi);
    }
  }
  // leftovers are 1 up to rounding
  for (std::size_t t : small) prob_[t] = 1.0;
  for (std::size_t t : large) prob_[t] = 1.0;
}

NeighborSampler::NeighborSampler(const WeightMatrix& weights) {
  rows_.reserve(weights.n());
  for (std::size_t i = 0; i < weights.n(); ++i) rows_.emplace_back(weights.normalized_row(i));
}

void NeighborSampler::sample_into(std::size_t agent, std::size_t kappa, Rng& rng,
                                  std::vector<std::size_t>& out) const {
  if (agent >= rows_.size()) throw DomainError("agent id out of range");
  if (kappa == 0) throw DomainError("kappa must be at least 1");
  out.resize(kappa);
  const AliasTable& row = rows_[agent];
  for (std::size_t m = 0; m < kappa; ++m) out[m] = row.sample(rng);
}

NeighborSample NeighborSampler::sample(std::size_t agent, std::size_t kappa, Rng& rng) const {
  NeighborSample out{agent, {}};
  sample_into(agent, kappa, rng, out.indices);
  return out;
}

NeighborSample sample_neighbors(const NeighborSampler& sampler, std::size_t agent,
                                std::size_t kappa, Rng& rng) {
  return sampler.sample(agent, kappa, rng);
}

Histogram empirical_joint(const NeighborSample& sample, std::span<const std::size_t> states,
                          std::span<const std::size_t> actions, std::size_t n_states,
                          std::size_t n_actions) {
  if (states.size() != actions.size()) throw DimensionError("states and actions differ in length");
  std::vector<std::uint32_t> counts(n_states * n_actions, 0);
  for (std::size_t j : sample.indices) {
    if (j >= states.size()) throw DimensionError("neighbor id outside the state array");
    if (states[j] >= n_states || actions[j] >= n_actions) throw DomainError("state/action id out of range");
    ++counts[states[j] * n_actions + actions[j]];
  }
  return Histogram(Alphabet::product(n_states, n_actions), std::move(counts));
}

Histogram empirical_marginal(const NeighborSample& sample, std::span<const std::size_t> states,
                             std::size_t n_states) {
  std::vector<std::uint32_t> counts(n_states, 0);
  for (std::size_t j : sample.indices) {
    if (j >= states.size()) throw DimensionError("neighbor id outside the state array");
    if (states[j] >= n_states) throw DomainError("state id out of range");
    ++counts[states[j]];
  }
  return Histogram(Alphabet(n_states), std::move(counts));
}

std::vector<double> exact_aggregate(const WeightMatrix& weights, std::size_t agent,
                                    std::span<const std::size_t> states,
                                    std::span<const std::size_t> actions, std::size_t n_states,
                                    std::size_t n_actions) {
  const std::size_t n = weights.n();
  if (states.size() != n || actions.size() != n) {
    throw DimensionError("exact_aggregate: arrays must have length n");
  }
  std::vector<double> z(n_states * n_actions, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == agent) continue;
    z[states[j] * n_actions + actions[j]] += weights.normalized(agent, j);
  }
  return z;
}

std::vector<double> exact_state_aggregate(const WeightMatrix& weights, std::size_t agent,
                                          std::span<const std::size_t> states,
                                          std::size_t n_states) {
  const std::size_t n = weights.n();
  if (states.size() != n) throw DimensionError("exact_state_aggregate: states must have length n");
  std::vector<double> g(n_states, 0.0);
  const auto row = weights.normalized_row(agent);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != agent) g[states[j]] += row[j];
  }
  return g;
}

HTEstimate ht_estimate(const WeightMatrix& weights, std::size_t agent,
                       std::span<const double> proposal, std::size_t kappa,
                       std::span<const std::size_t> states, std::span<const std::size_t> actions,
                       std::size_t n_states, std::size_t n_actions, Rng& rng) {
  const std::size_t n = weights.n();
  if (proposal.size() != n) throw DimensionError("proposal must have length n");
  if (states.size() != n || actions.size() != n) throw DimensionError("arrays must have length n");
  if (kappa == 0) throw DomainError("kappa must be at least 1");
  HTEstimate est;
  est.proposal.assign(proposal.begin(), proposal.end());
  est.proposal[agent] = 0.0;
  double total = 0.0;
  for (double q : est.proposal) {
    if (q < 0.0) throw DomainError("proposal must be non-negative");
    total += q;
  }
  if (!(total > 0.0)) throw DomainError("proposal has no mass off the focal agent");
  for (double& q : est.proposal) q /= total;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != agent && weights.normalized(agent, j) > 0.0 && est.proposal[j] <= 0.0) {
      throw DomainError("proposal is zero at agent " + std::to_string(j) +
                        " where the graphon weight is positive");
    }
  }
  const AliasTable table(est.proposal);
  est.draws.resize(kappa);
  est.weights.resize(kappa);
  est.estimate.assign(n_states * n_actions, 0.0);
  for (std::size_t m = 0; m < kappa; ++m) {
    const std::size_t j = table.sample(rng);
    est.draws[m] = j;
    est.weights[m] = weights.normalized(agent, j) / est.proposal[j];
    est.estimate[states[j] * n_actions + actions[j]] += est.weights[m] / static_cast<double>(kappa);
  }
  return est;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) return {};
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(0.0, v[k] - theta);
  return out;
}

double tv_concentration_bound(std::size_t n_states, std::size_t kappa, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (kappa == 0) throw DomainError("kappa must be at least 1");
  return std::sqrt((static_cast<double>(n_states) * std::log(2.0) + std::log(2.0 / delta)) /
                   (2.0 * static_cast<double>(kappa)));
}

}  // namespace gmfs
