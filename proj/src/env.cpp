#include "gmfs/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <utility>

#include "gmfs/errors.hpp"

namespace gmfs {

namespace {

void check_ids(const Environment& env, std::size_t s, std::size_t a) {
  if (s >= env.n_states()) {
    throw DomainError("state id " + std::to_string(s) + " out of range for " + env.name());
  }
  if (a >= env.n_actions()) {
    throw DomainError("action id " + std::to_string(a) + " out of range for " + env.name());
  }
}

void check_marginal(const Environment& env, std::span<const double> g) {
  if (g.size() != env.n_states()) throw DimensionError("state marginal has wrong length");
  double total = 0.0;
  for (double v : g) {
    if (v < -1e-12) throw DomainError("state marginal has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("state marginal does not sum to 1");
}

}  // namespace

std::vector<double> step_distribution(const Environment& env, std::size_t s, std::size_t a,
                                      std::span<const double> g) {
  check_ids(env, s, a);
  check_marginal(env, g);
  std::vector<double> out(env.n_states(), 0.0);
  env.transition(s, a, g, out);
  return out;
}

double local_reward(const Environment& env, std::size_t s, std::size_t a,
                    std::span<const double> g) {
  check_ids(env, s, a);
  check_marginal(env, g);
  return env.reward(s, a, g);
}

double team_reward(const Environment& env, std::span<const std::size_t> states,
                   std::span<const std::size_t> actions,
                   std::span<const std::vector<double>> aggregates) {
  const std::size_t n = states.size();
  if (n == 0) throw DomainError("team_reward needs at least one agent");
  if (actions.size() != n || aggregates.size() != n) {
    throw DimensionError("team_reward: states, actions and aggregates differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += local_reward(env, states[i], actions[i], aggregates[i]);
  return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------

WarehouseEnv::WarehouseEnv(WarehouseParams params) : params_(params) {
  if (!(params_.min_utility >= 0.0 && params_.min_utility <= 1.0)) {
    throw DomainError("warehouse min_utility must lie in [0, 1]");
  }
  for (double p : {params_.base_success, params_.min_work_success}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("warehouse success probabilities must lie in [0, 1]");
  }
  if (params_.congestion_slope < 0.0 || params_.congestion_sensitivity < 0.0) {
    throw DomainError("warehouse congestion parameters must be non-negative");
  }
  // reward is affine in the utility multiplier, so extremes sit at its endpoints
  reward_bound_ = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (double mult : {params_.min_utility, 1.0}) {
        reward_bound_ = std::max(reward_bound_,
                                 std::abs(params_.state_values[s] * mult - params_.action_costs[a]));
      }
    }
  }
}

void WarehouseEnv::transition(std::size_t s, std::size_t a, std::span<const double> g,
                              std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (a == kWorking) {
    const double p = std::max(params_.min_work_success,
                              params_.base_success - params_.congestion_slope * g[kWorking]);
    out[kWorking] += p;
    out[kTransit] += 1.0 - p;
  } else {
    out[a] += params_.base_success;
    out[s] += 1.0 - params_.base_success;
  }
}

double WarehouseEnv::reward(std::size_t s, std::size_t a, std::span<const double> g) const {
  const double mult =
      std::max(params_.min_utility, 1.0 - params_.congestion_sensitivity * g[kWorking]);
  return params_.state_values[s] * mult - params_.action_costs[a];
}

// ---------------------------------------------------------------------------

TabularEnv::TabularEnv(std::string name, std::size_t n_states, std::size_t n_actions,
                       std::vector<double> kernel, std::vector<double> reward_base,
                       std::vector<double> reward_coef)
    : name_(std::move(name)),
      n_states_(n_states),
      n_actions_(n_actions),
      kernel_(std::move(kernel)),
      reward_base_(std::move(reward_base)),
      reward_coef_(std::move(reward_coef)) {
  if (n_states_ == 0 || n_actions_ == 0) throw DomainError("tabular env needs |S|, |A| >= 1");
  const std::size_t sa = n_states_ * n_actions_;
  if (kernel_.size() != sa * n_states_ * n_states_ || reward_base_.size() != sa ||
      reward_coef_.size() != sa * n_states_) {
    throw DimensionError("tabular env coefficient arrays have the wrong size");
  }
  for (std::size_t row = 0; row < sa * n_states_; ++row) {
    double total = 0.0;
    for (std::size_t k = 0; k < n_states_; ++k) {
      const double p = kernel_[row * n_states_ + k];
      if (p < 0.0) throw DomainError("tabular kernel entries must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("tabular kernel rows must sum to 1");
  }
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      const std::size_t sa_idx = s * n_actions_ + a;
      for (std::size_t x = 0; x < n_states_; ++x) {
        reward_bound_ = std::max(
            reward_bound_, std::abs(reward_base_[sa_idx] + reward_coef_[sa_idx * n_states_ + x]));
        for (std::size_t y = 0; y < n_states_; ++y) {
          const double* px = &kernel_[k_index(s, a, x)];
          const double* py = &kernel_[k_index(s, a, y)];
          double l1 = 0.0;
          for (std::size_t k = 0; k < n_states_; ++k) l1 += std::abs(px[k] - py[k]);
          lipschitz_p_ = std::max(lipschitz_p_, 0.5 * l1);
        }
      }
    }
  }
}

void TabularEnv::transition(std::size_t s, std::size_t a, std::span<const double> g,
                            std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t x = 0; x < n_states_; ++x) {
    if (g[x] == 0.0) continue;
    const double* row = &kernel_[k_index(s, a, x)];
    for (std::size_t k = 0; k < n_states_; ++k) out[k] += g[x] * row[k];
  }
}

double TabularEnv::reward(std::size_t s, std::size_t a, std::span<const double> g) const {
  const std::size_t sa = s * n_actions_ + a;
  double r = reward_base_[sa];
  for (std::size_t x = 0; x < n_states_; ++x) r += reward_coef_[sa * n_states_ + x] * g[x];
  return r;
}

TabularEnv TabularEnv::parse(const std::string& text) {
  std::string name = "tabular";
  std::size_t ns = 0;
  std::size_t na = 0;
  std::map<std::array<std::size_t, 3>, std::vector<double>> kernel_rows;
  std::map<std::array<std::size_t, 2>, std::vector<double>> reward_rows;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("tabular env line " + std::to_string(lineno) + ": " + msg);
  };
  auto read_numbers = [&](std::istringstream& ls) {
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) fail("bad number '" + tok + "'");
      } catch (const std::invalid_argument&) {
        fail("bad number '" + tok + "'");
      }
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string directive;
    if (!(ls >> directive)) continue;
    if (directive == "name") {
      if (!(ls >> name)) fail("name needs a value");
    } else if (directive == "states") {
      if (!(ls >> ns) || ns == 0) fail("states needs a positive integer");
    } else if (directive == "actions") {
      if (!(ls >> na) || na == 0) fail("actions needs a positive integer");
    } else if (directive == "kernel" || directive == "reward") {
      if (ns == 0 || na == 0) fail("declare states and actions first");
      std::size_t s = 0, a = 0, x = 0;
      std::string colon;
      const bool is_kernel = directive == "kernel";
      if (!(ls >> s >> a)) fail("missing (s, a)");
      if (is_kernel && !(ls >> x)) fail("missing neighbor state x");
      if (!(ls >> colon) || colon != ":") fail("expected ':' before coefficients");
      if (s >= ns || a >= na || x >= ns) fail("index out of range");
      auto values = read_numbers(ls);
      if (is_kernel) {
        if (values.size() != ns) fail("kernel row needs " + std::to_string(ns) + " values");
        if (!kernel_rows.emplace(std::array{s, a, x}, std::move(values)).second)
          fail("duplicate kernel row");
      } else {
        if (values.size() != ns + 1) fail("reward row needs " + std::to_string(ns + 1) + " values");
        if (!reward_rows.emplace(std::array{s, a}, std::move(values)).second)
          fail("duplicate reward row");
      }
    } else {
      fail("unknown directive '" + directive + "'");
    }
  }
  if (ns == 0 || na == 0) throw ConfigError("tabular env must declare states and actions");
  if (kernel_rows.size() != ns * na * ns) throw ConfigError("tabular env is missing kernel rows");
  if (reward_rows.size() != ns * na) throw ConfigError("tabular env is missing reward rows");

  std::vector<double> kernel;
  kernel.reserve(ns * na * ns * ns);
  for (const auto& [key, row] : kernel_rows) kernel.insert(kernel.end(), row.begin(), row.end());
  std::vector<double> base;
  std::vector<double> coef;
  for (const auto& [key, row] : reward_rows) {
    base.push_back(row[0]);
    coef.insert(coef.end(), row.begin() + 1, row.end());
  }
  try {
    return TabularEnv(name, ns, na, std::move(kernel), std::move(base), std::move(coef));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("tabular env: ") + e.what());
  }
}

TabularEnv TabularEnv::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open environment file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

std::string TabularEnv::serialize() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "name " << name_ << "\nstates " << n_states_ << "\nactions " << n_actions_ << "\n";
  for (std::size_t s = 0; s < n_states_; ++s)
    for (std::size_t a = 0; a < n_actions_; ++a)
      for (std::size_t x = 0; x < n_states_; ++x) {
        out << "kernel " << s << ' ' << a << ' ' << x << " :";
        for (std::size_t k = 0; k < n_states_; ++k) out << ' ' << kernel_[k_index(s, a, x) + k];
        out << '\n';
      }
  for (std::size_t s = 0; s < n_states_; ++s)
    for (std::size_t a = 0; a < n_actions_; ++a) {
      const std::size_t sa = s * n_actions_ + a;
      out << "reward " << s << ' ' << a << " : " << reward_base_[sa];
      for (std::size_t x = 0; x < n_states_; ++x) out << ' ' << reward_coef_[sa * n_states_ + x];
      out << '\n';
    }
  return out.str();
}

TabularEnv TabularEnv::toy2() {
  return parse(R"(
name toy2
states 2
actions 2
# a = 0 rests, a = 1 tries to work; working neighbors (x = 1) cause congestion
kernel 0 0 0 : 0.95 0.05
kernel 0 0 1 : 0.95 0.05
kernel 0 1 0 : 0.2 0.8
kernel 0 1 1 : 0.6 0.4
kernel 1 0 0 : 0.8 0.2
kernel 1 0 1 : 0.8 0.2
kernel 1 1 0 : 0.1 0.9
kernel 1 1 1 : 0.5 0.5
reward 0 0 : 0.0 0.0 0.0
reward 0 1 : -0.1 0.0 0.0
reward 1 0 : 1.0 0.0 -0.6
reward 1 1 : 0.9 0.0 -0.6
)");
}

// ---------------------------------------------------------------------------

StochasticRewardEnv::StochasticRewardEnv(std::shared_ptr<const Environment> base,
                                         NoiseFamily family, double half_width)
    : base_(std::move(base)), family_(family), half_width_(half_width) {
  if (!base_) throw DomainError("stochastic reward env needs a base environment");
  if (family_ == NoiseFamily::kDegenerate) half_width_ = 0.0;
  if (!(half_width_ >= 0.0)) throw DomainError("noise half-width must be non-negative");
}

double StochasticRewardEnv::sample_reward(std::size_t s, std::size_t a, std::span<const double> g,
                                          Rng& rng) const {
  return perturb(local_reward(*base_, s, a, g), rng);
}

double StochasticRewardEnv::perturb(double mean, Rng& rng) const {
  if (family_ == NoiseFamily::kDegenerate || half_width_ == 0.0) return mean;
  return mean + half_width_ * (2.0 * rng.uniform() - 1.0);
}

}  // namespace gmfs
