#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmfs/rng.hpp"

namespace gmfs {

/// Local dynamics of one agent given the state marginal of its neighborhood.
///
/// Implementations are pure: no hidden state, no randomness. Marginals are
/// passed as pmfs over S so the same definition serves exact aggregates
/// (arbitrary reals) and histogram points.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t n_states() const = 0;
  virtual std::size_t n_actions() const = 0;

  /// Writes P(. | s, a, g) into `out` (length n_states).
  virtual void transition(std::size_t s, std::size_t a, std::span<const double> g,
                          std::span<double> out) const = 0;
  virtual double reward(std::size_t s, std::size_t a, std::span<const double> g) const = 0;

  /// Sup norm of the local reward over all (s, a, g).
  virtual double reward_bound() const = 0;
  /// TV-Lipschitz constant of the kernel in g, when known.
  virtual std::optional<double> lipschitz_p() const { return std::nullopt; }
  /// True when P and r see neighbors only through the state marginal.
  virtual bool marginal_sufficient() const { return true; }
};

/// Validates ids and g, then returns P(. | s, a, g).
std::vector<double> step_distribution(const Environment& env, std::size_t s, std::size_t a,
                                      std::span<const double> g);
double local_reward(const Environment& env, std::size_t s, std::size_t a,
                    std::span<const double> g);

/// Mean of the local rewards; `aggregates` holds one state pmf per agent.
double team_reward(const Environment& env, std::span<const std::size_t> states,
                   std::span<const std::size_t> actions,
                   std::span<const std::vector<double>> aggregates);

/// Robots that are idle (0), in transit (1) or working (2); actions name the
/// intended next state. Entering or staying in the working state gets harder
/// as the neighborhood's working fraction grows.
struct WarehouseParams {
  std::array<double, 3> state_values{10.0, 5.0, 20.0};
  std::array<double, 3> action_costs{0.0, 0.0, 5.0};
  double congestion_sensitivity = 5.0;
  double min_utility = 0.4;
  double base_success = 0.9;
  double min_work_success = 0.1;
  double congestion_slope = 0.8;
};

class WarehouseEnv final : public Environment {
 public:
  static constexpr std::size_t kIdle = 0;
  static constexpr std::size_t kTransit = 1;
  static constexpr std::size_t kWorking = 2;

  explicit WarehouseEnv(WarehouseParams params = {});

  std::string name() const override { return "warehouse"; }
  std::size_t n_states() const override { return 3; }
  std::size_t n_actions() const override { return 3; }
  void transition(std::size_t s, std::size_t a, std::span<const double> g,
                  std::span<double> out) const override;
  double reward(std::size_t s, std::size_t a, std::span<const double> g) const override;
  double reward_bound() const override { return reward_bound_; }
  std::optional<double> lipschitz_p() const override { return params_.congestion_slope; }

  const WarehouseParams& params() const { return params_; }

 private:
  WarehouseParams params_;
  double reward_bound_;
};

/// Environment whose kernel and reward are affine in the neighborhood marginal:
///
///   P(. | s, a, g) = sum_x g(x) K[s][a][x](.)
///   r(s, a, g)     = base[s][a] + sum_x coef[s][a][x] g(x)
///
/// Each K[s][a][x] is a pmf, so every P is a valid pmf without clipping.
///
/// Text format, one directive per line, `#` starts a comment:
///
///   name   <identifier>
///   states <|S|>
///   actions <|A|>
///   kernel <s> <a> <x> : p_0 ... p_{|S|-1}
///   reward <s> <a> : base c_0 ... c_{|S|-1}
///
/// Every (s, a, x) kernel row and every (s, a) reward row must appear once.
class TabularEnv final : public Environment {
 public:
  TabularEnv(std::string name, std::size_t n_states, std::size_t n_actions,
             std::vector<double> kernel, std::vector<double> reward_base,
             std::vector<double> reward_coef);

  static TabularEnv parse(const std::string& text);
  static TabularEnv load(const std::string& path);
  std::string serialize() const;

  /// Two-state, two-action congestion toy used by the small-instance checks.
  static TabularEnv toy2();

  std::string name() const override { return name_; }
  std::size_t n_states() const override { return n_states_; }
  std::size_t n_actions() const override { return n_actions_; }
  void transition(std::size_t s, std::size_t a, std::span<const double> g,
                  std::span<double> out) const override;
  double reward(std::size_t s, std::size_t a, std::span<const double> g) const override;
  double reward_bound() const override { return reward_bound_; }
  std::optional<double> lipschitz_p() const override { return lipschitz_p_; }

 private:
  std::size_t k_index(std::size_t s, std::size_t a, std::size_t x) const {
    return ((s * n_actions_ + a) * n_states_ + x) * n_states_;
  }

  std::string name_;
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> kernel_;       // [s][a][x][s']
  std::vector<double> reward_base_;  // [s][a]
  std::vector<double> reward_coef_;  // [s][a][x]
  double reward_bound_ = 0.0;
  double lipschitz_p_ = 0.0;
};

enum class NoiseFamily { kDegenerate, kUniform };

/// Adds zero-mean bounded noise to a base environment's reward.
class StochasticRewardEnv {
 public:
  StochasticRewardEnv(std::shared_ptr<const Environment> base, NoiseFamily family,
                      double half_width);

  const Environment& base() const { return *base_; }
  std::shared_ptr<const Environment> base_ptr() const { return base_; }
  NoiseFamily family() const { return family_; }
  double half_width() const { return half_width_; }
  /// Known support [low, high] covering every reward distribution.
  double support_low() const { return -base_->reward_bound() - half_width_; }
  double support_high() const { return base_->reward_bound() + half_width_; }

  double sample_reward(std::size_t s, std::size_t a, std::span<const double> g, Rng& rng) const;
  /// A draw of the noisy reward around a known mean. Consumes no randomness
  /// when the noise is degenerate.
  double perturb(double mean, Rng& rng) const;

 private:
  std::shared_ptr<const Environment> base_;
  NoiseFamily family_;
  double half_width_;
};

}  // namespace gmfs
