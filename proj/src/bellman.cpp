#include "gmfs/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmfs/errors.hpp"
#include "gmfs/parallel.hpp"

namespace gmfs {

namespace {

constexpr std::uint64_t kNoAggregate = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kBlock = 64;

// Inverse-CDF table for a pmf. Entries from the last positive outcome on are
// pushed above 1 so rounding can never select a zero-probability tail state.
void fill_cdf(std::span<const double> pmf, double* cdf) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    cdf[k] = acc;
    if (pmf[k] > 0.0) last = k;
  }
  for (std::size_t k = last; k < pmf.size(); ++k) cdf[k] = 2.0;
}

std::size_t draw(Rng& rng, const double* cdf, std::size_t n) {
  return rng.categorical_cdf(std::span<const double>(cdf, n));
}

void run_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    body(b * kBlock, std::min(n, (b + 1) * kBlock));
  });
}

}  // namespace

SurrogateModel::SurrogateModel(std::shared_ptr<const Environment> env, SurrogateSettings settings)
    : env_(std::move(env)),
      settings_(settings),
      ns_(env_ ? env_->n_states() : 0),
      na_(env_ ? env_->n_actions() : 0),
      marginal_index_(std::max<std::size_t>(ns_, 1), std::max<std::uint32_t>(settings.kappa, 1)) {
  if (!env_) throw DomainError("surrogate model needs an environment");
  if (ns_ == 0 || na_ == 0) throw DomainError("environment has no states or actions");
  if (settings_.kappa == 0) throw DomainError("kappa must be at least 1");
  if (!(settings_.gamma >= 0.0 && settings_.gamma < 1.0)) {
    throw DomainError("gamma must lie in [0, 1)");
  }
  if (settings_.mode == Mode::kMarginal && !env_->marginal_sufficient()) {
    throw DomainError("environment '" + env_->name() +
                      "' is not marginal-sufficient; use joint mode");
  }
  if (!settings_.neighbor_actions) {
    settings_.neighbor_actions = settings_.mode == Mode::kJoint ? NeighborActionRule::kGreedy
                                                                : NeighborActionRule::kUniform;
  }
  const std::uint32_t kappa = settings_.kappa;
  n_g_ = static_cast<std::size_t>(marginal_index_.total());

  if (settings_.mode == Mode::kJoint) {
    fibers_ = std::make_unique<FiberIndex>(ns_, na_, kappa);
    const auto& joint = fibers_->joint();
    n_hist_ = static_cast<std::size_t>(joint.total());
    hist_alphabet_ = ns_ * na_;
    marginal_of_.resize(n_hist_);
    hist_counts_.resize(n_hist_ * hist_alphabet_);
    for (std::size_t h = 0; h < n_hist_; ++h) {
      marginal_of_[h] = fibers_->marginal_of(h);
      joint.unrank(h, std::span<std::uint32_t>(hist_counts_.data() + h * hist_alphabet_,
                                               hist_alphabet_));
    }
  } else {
    n_hist_ = n_g_;
    hist_alphabet_ = ns_;
    marginal_of_.resize(n_hist_);
    hist_counts_.resize(n_hist_ * hist_alphabet_);
    for (std::size_t h = 0; h < n_hist_; ++h) {
      marginal_of_[h] = h;
      marginal_index_.unrank(h, std::span<std::uint32_t>(hist_counts_.data() + h * ns_, ns_));
    }
  }

  // Tabulate reward and kernel at every state-marginal histogram.
  reward_.resize(ns_ * na_ * n_g_);
  kernel_.resize(ns_ * na_ * n_g_ * ns_);
  kernel_cdf_.resize(kernel_.size());
  std::vector<std::uint32_t> counts(ns_);
  std::vector<double> g(ns_);
  for (std::size_t r = 0; r < n_g_; ++r) {
    marginal_index_.unrank(r, counts);
    for (std::size_t x = 0; x < ns_; ++x) g[x] = static_cast<double>(counts[x]) / kappa;
    for (std::size_t s = 0; s < ns_; ++s) {
      for (std::size_t a = 0; a < na_; ++a) {
        const std::size_t cell = (s * na_ + a) * n_g_ + r;
        reward_[cell] = env_->reward(s, a, g);
        std::span<double> p(kernel_.data() + cell * ns_, ns_);
        env_->transition(s, a, g, p);
        fill_cdf(p, kernel_cdf_.data() + cell * ns_);
      }
    }
  }

  mixture_.assign(ns_ * n_g_ * ns_, 0.0);
  mixture_cdf_.resize(mixture_.size());
  for (std::size_t x = 0; x < ns_; ++x) {
    for (std::size_t r = 0; r < n_g_; ++r) {
      double* mix = mixture_.data() + (x * n_g_ + r) * ns_;
      for (std::size_t u = 0; u < na_; ++u) {
        auto p = kernel_at(x, u, r);
        for (std::size_t y = 0; y < ns_; ++y) mix[y] += p[y] / static_cast<double>(na_);
      }
      fill_cdf(std::span<const double>(mix, ns_), mixture_cdf_.data() + (x * n_g_ + r) * ns_);
    }
  }

  loo_.assign(ns_ * ns_ * n_g_, kNoAggregate);
  for (std::size_t r = 0; r < n_g_; ++r) {
    marginal_index_.unrank(r, counts);
    for (std::size_t focal = 0; focal < ns_; ++focal) {
      for (std::size_t x = 0; x < ns_; ++x) {
        std::uint64_t out = r;
        if (settings_.aggregate == SurrogateAggregate::kLeaveOneOut) {
          if (counts[x] == 0) continue;
          auto c = counts;
          --c[x];
          ++c[focal];
          out = marginal_index_.rank(c);
        }
        loo_[(focal * ns_ + x) * n_g_ + r] = out;
      }
    }
  }

  // grow_[j] maps (level-j histogram, new state) to its level-(j+1) rank.
  level_size_.resize(kappa + 1);
  level_size_[0] = 1;
  grow_.resize(kappa);
  std::vector<HistogramIndex> levels;
  levels.reserve(kappa);
  for (std::uint32_t j = 1; j <= kappa; ++j) {
    levels.emplace_back(ns_, j);
    level_size_[j] = static_cast<std::size_t>(levels.back().total());
  }
  for (std::uint32_t j = 0; j < kappa; ++j) {
    grow_[j].resize(level_size_[j] * ns_);
    for (std::size_t r = 0; r < level_size_[j]; ++r) {
      if (j == 0) {
        std::fill(counts.begin(), counts.end(), 0u);
      } else {
        levels[j - 1].unrank(r, counts);
      }
      for (std::size_t x = 0; x < ns_; ++x) {
        ++counts[x];
        grow_[j][r * ns_ + x] = levels[j].rank(counts);
        --counts[x];
      }
    }
  }
}

QTable SurrogateModel::make_table() const {
  QTableMeta meta;
  meta.gamma = settings_.gamma;
  meta.env_name = env_->name();
  return QTable(settings_.mode, ns_, na_, settings_.kappa, meta);
}

void SurrogateModel::check_table(const QTable& q) const {
  if (q.mode() != settings_.mode || q.n_states() != ns_ || q.n_actions() != na_ ||
      q.kappa() != settings_.kappa) {
    throw DimensionError("Q-table shape does not match the surrogate model");
  }
}

std::uint64_t SurrogateModel::neighbor_aggregate(std::size_t focal, std::size_t x,
                                                 std::uint64_t g_rank) const {
  return loo_[(focal * ns_ + x) * n_g_ + g_rank];
}

std::uint64_t SurrogateModel::entry_to_h(std::size_t entry, std::size_t& s, std::size_t& a) const {
  const std::size_t sa = entry / n_hist_;
  s = sa / na_;
  a = sa % na_;
  return entry % n_hist_;
}

BackupChoice SurrogateModel::fiber_backup(const QTable& q, std::size_t s,
                                          std::uint64_t g_rank) const {
  if (s >= ns_) throw DomainError("state id out of range");
  if (g_rank >= n_g_) throw DomainError("histogram rank out of range");
  if (settings_.mode == Mode::kMarginal) {
    BackupChoice best{q(s, 0, g_rank), 0, g_rank};
    for (std::size_t a = 1; a < na_; ++a) {
      const double v = q(s, a, g_rank);
      if (v > best.value) best = {v, a, g_rank};
    }
    return best;
  }
  const auto members = fibers_->fiber_of(g_rank);
  BackupChoice best{q(s, 0, members[0]), 0, members[0]};
  for (std::size_t a = 0; a < na_; ++a) {
    for (std::uint64_t z : members) {
      const double v = q(s, a, z);
      if (v > best.value) best = {v, a, z};
    }
  }
  return best;
}

double SurrogateModel::fiber_backup(const QTable& q, std::size_t s, const Histogram& g) const {
  check_table(q);
  if (g.alphabet().size() != ns_) throw DimensionError("fiber_backup expects a state marginal");
  if (g.kappa() != settings_.kappa) throw DomainError("histogram denominator differs from kappa");
  return fiber_backup(q, s, marginal_index_.rank(g)).value;
}

SurrogateModel::Context SurrogateModel::make_context(const QTable& q) const {
  check_table(q);
  Context ctx{&q, std::vector<double>(ns_ * n_g_), std::vector<std::uint32_t>(ns_ * n_g_)};
  for (std::size_t s = 0; s < ns_; ++s) {
    for (std::size_t r = 0; r < n_g_; ++r) {
      const BackupChoice c = fiber_backup(q, s, r);
      ctx.backup[s * n_g_ + r] = c.value;
      ctx.greedy[s * n_g_ + r] = static_cast<std::uint32_t>(c.action);
    }
  }
  return ctx;
}

template <typename ActionFn>
void SurrogateModel::neighbor_pmfs(std::size_t s, std::uint64_t h, ActionFn&& greedy_action,
                                   std::vector<const double*>& pmfs,
                                   std::vector<const double*>& cdfs,
                                   std::vector<std::size_t>* states) const {
  pmfs.clear();
  cdfs.clear();
  if (states) states->clear();
  const std::uint64_t g = marginal_of_[h];
  const std::uint32_t* counts = hist_counts_.data() + h * hist_alphabet_;
  auto push = [&](std::size_t x, std::uint32_t c, const double* p, const double* cdf) {
    for (std::uint32_t k = 0; k < c; ++k) {
      pmfs.push_back(p);
      cdfs.push_back(cdf);
      if (states) states->push_back(x);
    }
  };
  if (settings_.mode == Mode::kMarginal) {
    for (std::size_t x = 0; x < ns_; ++x) {
      if (counts[x] == 0) continue;
      const std::uint64_t gm = neighbor_aggregate(s, x, g);
      if (settings_.neighbor_actions == NeighborActionRule::kUniform) {
        const std::size_t off = (x * n_g_ + gm) * ns_;
        push(x, counts[x], mixture_.data() + off, mixture_cdf_.data() + off);
      } else {
        const std::size_t u = greedy_action(x, gm);
        push(x, counts[x], kernel_at(x, u, gm).data(), kernel_cdf(x, u, gm));
      }
    }
  } else {
    for (std::size_t x = 0; x < ns_; ++x) {
      for (std::size_t u = 0; u < na_; ++u) {
        const std::uint32_t c = counts[x * na_ + u];
        if (c == 0) continue;
        const std::uint64_t gm = neighbor_aggregate(s, x, g);
        push(x, c, kernel_at(x, u, gm).data(), kernel_cdf(x, u, gm));
      }
    }
  }
}

double SurrogateModel::evaluate_empirical(const Context& ctx, std::size_t entry, std::uint32_t m,
                                          Rng& rng, double reward) const {
  thread_local std::vector<const double*> pmfs;
  thread_local std::vector<const double*> cdfs;
  thread_local std::vector<std::uint32_t> next;
  std::size_t s;
  std::size_t a;
  const std::uint64_t h = entry_to_h(entry, s, a);
  neighbor_pmfs(
      s, h, [&](std::size_t x, std::uint64_t gm) { return ctx.greedy[x * n_g_ + gm]; }, pmfs,
      cdfs, nullptr);
  const double* focal = kernel_cdf(s, a, marginal_of_[h]);
  next.assign(ns_, 0);
  double sum = 0.0;
  for (std::uint32_t l = 0; l < m; ++l) {
    const std::size_t s_next = draw(rng, focal, ns_);
    std::fill(next.begin(), next.end(), 0u);
    for (const double* cdf : cdfs) ++next[draw(rng, cdf, ns_)];
    sum += ctx.backup[s_next * n_g_ + marginal_index_.rank(next)];
  }
  return reward + settings_.gamma * (sum / static_cast<double>(m));
}

double SurrogateModel::evaluate_exact(const Context& ctx, std::size_t entry) const {
  thread_local std::vector<const double*> pmfs;
  thread_local std::vector<const double*> cdfs;
  thread_local std::vector<double> cur;
  thread_local std::vector<double> nxt;
  std::size_t s;
  std::size_t a;
  const std::uint64_t h = entry_to_h(entry, s, a);
  neighbor_pmfs(
      s, h, [&](std::size_t x, std::uint64_t gm) { return ctx.greedy[x * n_g_ + gm]; }, pmfs,
      cdfs, nullptr);

  // Distribution of the neighbors' next-state histogram, one neighbor at a time.
  cur.assign(1, 1.0);
  for (std::size_t j = 0; j < pmfs.size(); ++j) {
    const double* p = pmfs[j];
    nxt.assign(level_size_[j + 1], 0.0);
    const auto& grow = grow_[j];
    for (std::size_t r = 0; r < cur.size(); ++r) {
      if (cur[r] == 0.0) continue;
      for (std::size_t x = 0; x < ns_; ++x) {
        if (p[x] > 0.0) nxt[grow[r * ns_ + x]] += cur[r] * p[x];
      }
    }
    cur.swap(nxt);
  }

  const std::uint64_t g = marginal_of_[h];
  const auto focal = kernel_at(s, a, g);
  double expect = 0.0;
  for (std::size_t s_next = 0; s_next < ns_; ++s_next) {
    if (focal[s_next] == 0.0) continue;
    const double* backup = ctx.backup.data() + s_next * n_g_;
    double inner = 0.0;
    for (std::size_t r = 0; r < n_g_; ++r) inner += cur[r] * backup[r];
    expect += focal[s_next] * inner;
  }
  return reward_at(s, a, g) + settings_.gamma * expect;
}

std::uint64_t SurrogateModel::exact_outcome_count() const {
  long double total = std::pow(static_cast<long double>(ns_), settings_.kappa + 1.0L);
  if (settings_.mode == Mode::kMarginal &&
      settings_.neighbor_actions == NeighborActionRule::kUniform) {
    total *= std::pow(static_cast<long double>(na_), static_cast<long double>(settings_.kappa));
  }
  if (total >= 18446744073709551615.0L) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(total);
}

namespace {

void require_exact_budget(const SurrogateModel& model) {
  const std::uint64_t count = model.exact_outcome_count();
  if (count > model.settings().exact_cap) {
    throw BudgetError("exact operator would enumerate " + std::to_string(count) +
                      " outcomes per entry (cap " + std::to_string(model.settings().exact_cap) +
                      "); use the empirical operator");
  }
}

std::uint64_t table_rank(const QTable& q, const Histogram& h, std::uint32_t kappa) {
  if (h.alphabet().size() != q.hist_alphabet()) {
    throw DimensionError("histogram alphabet does not match the table mode");
  }
  if (h.kappa() != kappa) throw DomainError("histogram denominator differs from kappa");
  return q.index().rank(h);
}

}  // namespace

Transition SurrogateModel::sample_transition(const QTable& q, std::size_t s, std::size_t a,
                                             std::uint64_t h,
                                             std::span<const double> next_action_pmf, Rng& rng,
                                             std::vector<std::uint32_t>* next_joint) const {
  thread_local std::vector<const double*> pmfs;
  thread_local std::vector<const double*> cdfs;
  thread_local std::vector<std::size_t> next_states;
  thread_local std::vector<std::uint32_t> next;
  if (s >= ns_ || a >= na_) throw DomainError("state/action id out of range");
  if (h >= n_hist_) throw DomainError("histogram rank out of range");
  neighbor_pmfs(
      s, h, [&](std::size_t x, std::uint64_t gm) { return fiber_backup(q, x, gm).action; }, pmfs,
      cdfs, nullptr);
  const std::uint64_t g = marginal_of_[h];
  Transition tr{s, a, h, reward_at(s, a, g), draw(rng, kernel_cdf(s, a, g), ns_), 0};
  next.assign(ns_, 0);
  next_states.resize(cdfs.size());
  for (std::size_t m = 0; m < cdfs.size(); ++m) {
    next_states[m] = draw(rng, cdfs[m], ns_);
    ++next[next_states[m]];
  }
  tr.next_marginal_rank = marginal_index_.rank(next);

  if (next_joint) {
    next_joint->assign(ns_ * na_, 0);
    std::vector<double> action_cdf;
    if (!next_action_pmf.empty()) {
      action_cdf.resize(na_);
      fill_cdf(next_action_pmf, action_cdf.data());
    }
    for (std::size_t x : next_states) {
      std::size_t u;
      if (!action_cdf.empty()) {
        u = draw(rng, action_cdf.data(), na_);
      } else if (settings_.neighbor_actions == NeighborActionRule::kUniform) {
        u = static_cast<std::size_t>(rng.below(na_));
      } else {
        u = fiber_backup(q, x, neighbor_aggregate(tr.next_state, x, tr.next_marginal_rank)).action;
      }
      ++(*next_joint)[x * na_ + u];
    }
  }
  return tr;
}

SurrogateOutcome SurrogateModel::surrogate_step(const QTable& q, std::size_t s, std::size_t a,
                                                const Histogram& h, Rng& rng) const {
  check_table(q);
  const std::uint64_t rank = table_rank(q, h, settings_.kappa);
  if (settings_.mode == Mode::kJoint) {
    std::vector<std::uint32_t> joint;
    const Transition tr = sample_transition(q, s, a, rank, {}, rng, &joint);
    return {tr.next_state, Histogram(Alphabet::product(ns_, na_), std::move(joint)),
            tr.next_marginal_rank};
  }
  const Transition tr = sample_transition(q, s, a, rank, {}, rng, nullptr);
  return {tr.next_state, Histogram(Alphabet(ns_), marginal_index_.unrank(tr.next_marginal_rank)),
          tr.next_marginal_rank};
}

double SurrogateModel::empirical_operator(const QTable& q, std::size_t s, std::size_t a,
                                          const Histogram& h, std::uint32_t m, Rng& rng) const {
  if (m == 0) throw DomainError("m must be at least 1");
  const Context ctx = make_context(q);
  if (s >= ns_ || a >= na_) throw DomainError("state/action id out of range");
  const std::uint64_t rank = table_rank(q, h, settings_.kappa);
  return evaluate_empirical(ctx, q.offset(s, a, rank), m, rng,
                            reward_at(s, a, marginal_of_[rank]));
}

double SurrogateModel::exact_operator(const QTable& q, std::size_t s, std::size_t a,
                                      const Histogram& h) const {
  require_exact_budget(*this);
  const Context ctx = make_context(q);
  if (s >= ns_ || a >= na_) throw DomainError("state/action id out of range");
  return evaluate_exact(ctx, q.offset(s, a, table_rank(q, h, settings_.kappa)));
}

QTable SurrogateModel::apply_exact(const QTable& q) const {
  require_exact_budget(*this);
  const Context ctx = make_context(q);
  QTable out = make_table();
  auto values = out.values();
  run_blocks(values.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) values[e] = evaluate_exact(ctx, e);
  });
  return out;
}

QTable SurrogateModel::apply_empirical(const QTable& q, std::uint32_t m, std::uint64_t seed,
                                       std::uint64_t realization) const {
  if (m == 0) throw DomainError("m must be at least 1");
  const Context ctx = make_context(q);
  QTable out = make_table();
  auto values = out.values();
  run_blocks(values.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) {
      std::size_t s;
      std::size_t a;
      const std::uint64_t h = entry_to_h(e, s, a);
      Rng rng(StreamTag::kTrain, {seed, e, realization});
      values[e] = evaluate_empirical(ctx, e, m, rng, reward_at(s, a, marginal_of_[h]));
    }
  });
  return out;
}

double SurrogateModel::off_policy_update(QTable& q, const Transition& tr, double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("learning rate must lie in (0, 1]");
  check_table(q);
  if (tr.s >= ns_ || tr.a >= na_ || tr.next_state >= ns_) {
    throw DomainError("transition state/action out of range");
  }
  if (tr.h >= n_hist_ || tr.next_marginal_rank >= n_g_) {
    throw DomainError("transition histogram rank out of range");
  }
  const double target =
      tr.reward + settings_.gamma * fiber_backup(q, tr.next_state, tr.next_marginal_rank).value;
  double& entry = q(tr.s, tr.a, tr.h);
  entry = (1.0 - alpha) * entry + alpha * target;
  return entry;
}

namespace {

// Shared sweep loop. `evaluate(ctx, entry, sweep)` returns the new entry value.
template <typename Evaluate>
ValueIterationResult sweep_loop(const SurrogateModel& model, const ValueIterationOptions& options,
                                Evaluate&& evaluate) {
  ValueIterationResult result{model.make_table(), {}, {}, 0, false};
  result.q.meta().seed = options.seed;
  for (std::uint32_t t = 0; t < options.max_sweeps; ++t) {
    const SurrogateModel::Context ctx = model.make_context(result.q);
    QTable next = model.make_table();
    auto values = next.values();
    run_blocks(values.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t e = lo; e < hi; ++e) values[e] = evaluate(ctx, e, t);
    });
    const double residual = sup_distance(next, result.q);
    next.meta() = result.q.meta();
    result.q = std::move(next);
    result.residuals.push_back(residual);
    result.sup_norms.push_back(result.q.sup_norm());
    result.sweeps = t + 1;
    result.q.meta().iterations = result.sweeps;
    result.q.meta().residual = residual;
    if (options.on_sweep) options.on_sweep(result.sweeps, residual);
    if (residual < options.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void check_options(const ValueIterationOptions& options) {
  if (!options.exact && options.samples == 0) throw DomainError("m must be at least 1");
  if (!(options.epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
}

}  // namespace

ValueIterationResult value_iteration(const SurrogateModel& model,
                                     const ValueIterationOptions& options) {
  check_options(options);
  if (options.exact) {
    require_exact_budget(model);
    return sweep_loop(model, options, [&](const SurrogateModel::Context& ctx, std::size_t e,
                                          std::uint32_t) { return model.evaluate_exact(ctx, e); });
  }
  const std::size_t n_hist = model.n_histograms();
  const std::size_t na = model.n_actions();
  return sweep_loop(model, options, [&](const SurrogateModel::Context& ctx, std::size_t e,
                                        std::uint32_t t) {
    const std::size_t sa = e / n_hist;
    const std::uint64_t g = model.marginal_rank_of(e % n_hist);
    Rng rng = options.resample_each_sweep ? Rng(StreamTag::kTrain, {options.seed, e, 0, t + 1u})
                                          : Rng(StreamTag::kTrain, {options.seed, e, 0});
    return model.evaluate_empirical(ctx, e, options.samples, rng,
                                    model.reward_at(sa / na, sa % na, g));
  });
}

ValueIterationResult value_iteration_stochastic(const SurrogateModel& model,
                                                const StochasticRewardEnv& env,
                                                std::uint32_t realizations,
                                                const ValueIterationOptions& options) {
  check_options(options);
  if (realizations == 0) throw DomainError("the number of realizations must be at least 1");
  if (model.env_ptr().get() != env.base_ptr().get()) {
    throw DomainError("surrogate model and stochastic environment use different base envs");
  }
  if (options.exact) require_exact_budget(model);
  const std::size_t n_hist = model.n_histograms();
  const std::size_t na = model.n_actions();
  return sweep_loop(model, options, [&](const SurrogateModel::Context& ctx, std::size_t e,
                                        std::uint32_t t) {
    const std::size_t sa = e / n_hist;
    const double mean = model.reward_at(sa / na, sa % na, model.marginal_rank_of(e % n_hist));
    double rho = 0.0;
    for (std::uint64_t xi = 0; xi < realizations; ++xi) {
      Rng noise = options.resample_each_sweep
                      ? Rng(StreamTag::kReward, {options.seed, e, xi, t + 1u})
                      : Rng(StreamTag::kReward, {options.seed, e, xi});
      const double reward = env.perturb(mean, noise);
      if (options.exact) {
        rho += model.evaluate_exact(ctx, e) - mean + reward;
        continue;
      }
      Rng rng = options.resample_each_sweep ? Rng(StreamTag::kTrain, {options.seed, e, xi, t + 1u})
                                            : Rng(StreamTag::kTrain, {options.seed, e, xi});
      rho += model.evaluate_empirical(ctx, e, options.samples, rng, reward);
    }
    return rho / static_cast<double>(realizations);
  });
}

QTable off_policy_learning(const SurrogateModel& model, const OffPolicyConfig& config) {
  const std::size_t na = model.n_actions();
  std::vector<double> behavior = config.behavior;
  if (behavior.empty()) behavior.assign(na, 1.0 / static_cast<double>(na));
  if (behavior.size() != na) throw DimensionError("behavior policy must have |A| entries");
  double total = 0.0;
  for (double p : behavior) {
    if (!(p > 0.0)) throw DomainError("behavior policy must be strictly positive on A");
    total += p;
  }
  for (double& p : behavior) p /= total;
  if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0)) {
    throw DomainError("learning rate must lie in (0, 1]");
  }
  if (config.decay < 0.0) throw DomainError("learning-rate decay must be non-negative");
  std::vector<double> behavior_cdf(na);
  fill_cdf(behavior, behavior_cdf.data());

  QTable q = model.make_table();
  q.meta().seed = config.seed;
  const bool joint = model.settings().mode == Mode::kJoint;
  const HistogramIndex& index = q.index();
  Rng rng(StreamTag::kOffPolicy, {config.seed});
  std::vector<std::uint32_t> next_joint;
  std::size_t s = 0;
  std::uint64_t h = 0;
  for (std::uint64_t t = 0; t < config.steps; ++t) {
    if (t == 0 || (config.trajectory_length > 0 && t % config.trajectory_length == 0)) {
      s = static_cast<std::size_t>(rng.below(model.n_states()));
      h = rng.below(model.n_histograms());
    }
    const std::size_t a = draw(rng, behavior_cdf.data(), na);
    const Transition tr =
        model.sample_transition(q, s, a, h, behavior, rng, joint ? &next_joint : nullptr);
    const double alpha = config.learning_rate / (1.0 + static_cast<double>(t) * config.decay);
    model.off_policy_update(q, tr, alpha);
    s = tr.next_state;
    h = joint ? index.rank(next_joint) : tr.next_marginal_rank;
  }
  q.meta().iterations = config.steps;
  return q;
}

std::uint64_t sample_budget(std::uint32_t kappa, double gamma, double reward_bound,
                            std::size_t n_states, std::size_t n_actions) {
  if (kappa == 0 || n_states == 0 || n_actions == 0) {
    throw DomainError("sample_budget: kappa, |S| and |A| must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("sample_budget: gamma must lie in (0, 1)");
  if (!(reward_bound > 0.0)) throw DomainError("sample_budget: reward bound must be positive");
  const long double k = kappa;
  const long double g = gamma;
  const long double lead = 25.0L * k * k * g * g / std::pow(1.0L - g, 4.0L) *
                           static_cast<long double>(reward_bound) * reward_bound;
  const long double log_term = std::log(200.0L) + 2.0L * std::log((long double)n_states) +
                               2.0L * std::log((long double)n_actions) +
                               static_cast<long double>(n_states * n_actions) * std::log(k);
  const long double m = std::ceil(lead * log_term);
  if (!(m < 9.2e18L)) throw OverflowError("sample budget exceeds 64-bit range");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

}  // namespace gmfs
