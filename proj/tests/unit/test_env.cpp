#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "gmfs/env.hpp"
#include "gmfs/errors.hpp"
#include "gmfs/rng.hpp"

using namespace gmfs;

namespace {

// Independent restatement of the warehouse dynamics used as the test oracle.
std::vector<double> warehouse_kernel_oracle(std::size_t s, std::size_t a, double g2) {
  std::vector<double> p(3, 0.0);
  const double success = a == 2 ? std::max(0.1, 0.9 - 0.8 * g2) : 0.9;
  const std::size_t fail_to = a == 2 ? 1 : s;
  p[a] += success;
  p[fail_to] += 1.0 - success;
  return p;
}

double warehouse_reward_oracle(std::size_t s, std::size_t a, double g2) {
  const double v[3] = {10.0, 5.0, 20.0};
  const double c[3] = {0.0, 0.0, 5.0};
  return v[s] * std::max(0.4, 1.0 - 5.0 * g2) - c[a];
}

std::vector<double> random_pmf(Rng& rng, std::size_t k) {
  std::vector<double> g(k);
  double sum = 0.0;
  for (auto& x : g) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (auto& x : g) x /= sum;
  return g;
}

}  // namespace

TEST_CASE("warehouse transition examples") {
  const WarehouseEnv env;
  auto p = step_distribution(env, 0, 2, std::vector<double>{1.0, 0.0, 0.0});
  CHECK(p[2] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(0.1));
  CHECK(p[0] == 0.0);
  p = step_distribution(env, 0, 2, std::vector<double>{0.0, 0.0, 1.0});
  CHECK(p[2] == doctest::Approx(0.1));
  CHECK(p[1] == doctest::Approx(0.9));
  for (double g2 : {0.0, 0.3, 1.0}) {
    p = step_distribution(env, 1, 1, std::vector<double>{1.0 - g2, 0.0, g2});
    CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("warehouse reward examples") {
  const WarehouseEnv env;
  CHECK(local_reward(env, 2, 2, std::vector<double>{1, 0, 0}) == 15.0);
  CHECK(local_reward(env, 2, 2, std::vector<double>{0, 0, 1}) == doctest::Approx(3.0));
  CHECK(local_reward(env, 0, 0, std::vector<double>{0, 1, 0}) == 10.0);
  CHECK(env.reward_bound() == 20.0);
}

TEST_CASE("warehouse matches the oracle on a random grid") {
  const WarehouseEnv env;
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = random_pmf(rng, 3);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 3; ++a) {
        const auto p = step_distribution(env, s, a, g);
        const auto o = warehouse_kernel_oracle(s, a, g[2]);
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          CHECK(p[k] >= 0.0);
          CHECK(p[k] == doctest::Approx(o[k]).epsilon(1e-14));
          sum += p[k];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        const double r = local_reward(env, s, a, g);
        CHECK(r == doctest::Approx(warehouse_reward_oracle(s, a, g[2])).epsilon(1e-14));
        CHECK(std::abs(r) <= env.reward_bound());
      }
    }
  }
}

TEST_CASE("warehouse Lipschitz diagnostics") {
  const WarehouseEnv env;
  Rng rng(12);
  double worst_reward_ratio = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = random_pmf(rng, 3);
    const auto h = random_pmf(rng, 3);
    const double tv_g = 0.5 * (std::abs(g[0] - h[0]) + std::abs(g[1] - h[1]) + std::abs(g[2] - h[2]));
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 3; ++a) {
        const auto p = step_distribution(env, s, a, g);
        const auto q = step_distribution(env, s, a, h);
        const double tv_p = 0.5 * (std::abs(p[0] - q[0]) + std::abs(p[1] - q[1]) + std::abs(p[2] - q[2]));
        CHECK(tv_p <= 0.8 * std::abs(g[2] - h[2]) + 1e-12);
        CHECK(tv_p <= 0.8 * 2.0 * tv_g + 1e-12);
        const double dr = std::abs(local_reward(env, s, a, g) - local_reward(env, s, a, h));
        const double v = env.params().state_values[s];
        CHECK(dr <= v * 5.0 * std::abs(g[2] - h[2]) + 1e-12);
        if (tv_g > 1e-9) worst_reward_ratio = std::max(worst_reward_ratio, dr / tv_g);
      }
    }
  }
  // Measured constant; reported rather than asserted against 2 * bound.
  MESSAGE("measured reward Lipschitz constant in TV: " << worst_reward_ratio);
  CHECK(worst_reward_ratio <= 2.0 * 20.0 * 5.0);
}

TEST_CASE("step_distribution validates inputs") {
  const WarehouseEnv env;
  const std::vector<double> g{0.2, 0.3, 0.5};
  CHECK_THROWS_AS(step_distribution(env, 3, 0, g), DomainError);
  CHECK_THROWS_AS(step_distribution(env, 0, 3, g), DomainError);
  CHECK_THROWS(step_distribution(env, 0, 0, std::vector<double>{0.2, 0.3, 0.4}));
  CHECK_THROWS(step_distribution(env, 0, 0, std::vector<double>{0.5, 0.5}));
  CHECK_THROWS(local_reward(env, 0, 7, g));
  CHECK_NOTHROW(step_distribution(env, 0, 0, std::vector<double>{0.2, 0.3, 0.5 + 5e-10}));
}

TEST_CASE("team reward is the mean of local rewards") {
  const WarehouseEnv env;
  const std::vector<std::vector<double>> one{{1, 0, 0}};
  const std::vector<std::size_t> s1{2}, a1{2};
  CHECK(team_reward(env, s1, a1, one) == 15.0);

  const std::vector<std::vector<double>> two{{1, 0, 0}, {0, 0, 1}};
  const std::vector<std::size_t> s2{2, 2}, a2{2, 2};
  CHECK(team_reward(env, s2, a2, two) == doctest::Approx(9.0));

  const std::vector<std::vector<double>> same{{0.5, 0.5, 0}, {0.5, 0.5, 0}, {0.5, 0.5, 0}};
  const std::vector<std::size_t> s3{1, 1, 1}, a3{0, 0, 0};
  CHECK(team_reward(env, s3, a3, same) == local_reward(env, 1, 0, same[0]));

  const std::vector<std::size_t> short_a{2};
  CHECK_THROWS_AS(team_reward(env, s2, short_a, two), DimensionError);
}

TEST_CASE("tabular environment text round trip") {
  const TabularEnv toy = TabularEnv::toy2();
  CHECK(toy.n_states() == 2);
  CHECK(toy.n_actions() == 2);
  CHECK(toy.reward_bound() == doctest::Approx(1.0));
  const TabularEnv again = TabularEnv::parse(toy.serialize());
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_pmf(rng, 2);
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        CHECK(again.reward(s, a, g) == toy.reward(s, a, g));
        CHECK(step_distribution(again, s, a, g) == step_distribution(toy, s, a, g));
      }
    }
  }
}

TEST_CASE("tabular environment evaluates the affine formulas") {
  const TabularEnv toy = TabularEnv::toy2();
  const std::vector<double> g{0.25, 0.75};
  // P(.|0,1,g) = 0.25*(0.2,0.8) + 0.75*(0.6,0.4)
  const auto p = step_distribution(toy, 0, 1, g);
  CHECK(p[0] == doctest::Approx(0.25 * 0.2 + 0.75 * 0.6));
  CHECK(p[1] == doctest::Approx(0.25 * 0.8 + 0.75 * 0.4));
  CHECK(toy.reward(1, 0, g) == doctest::Approx(1.0 - 0.6 * 0.75));
}

TEST_CASE("tabular parser rejects malformed input") {
  CHECK_THROWS(TabularEnv::parse("states 2\nactions 1\nkernel 0 0 0 : 1 0\n"));
  CHECK_THROWS(TabularEnv::parse(
      "states 1\nactions 1\nkernel 0 0 0 : 0.5\nreward 0 0 : 0 0\n"));
  CHECK_THROWS(TabularEnv::parse(
      "states 1\nactions 1\nkernel 0 0 0 : 1\nkernel 0 0 0 : 1\nreward 0 0 : 0 0\n"));
  CHECK_THROWS(TabularEnv::parse("states 1\nactions 1\nbogus\n"));
  CHECK_NOTHROW(TabularEnv::parse(
      "# one state\nstates 1\nactions 1\nkernel 0 0 0 : 1\nreward 0 0 : 0.5 0\n"));
}

TEST_CASE("degenerate noise returns the base reward") {
  auto base = std::make_shared<WarehouseEnv>();
  const StochasticRewardEnv env(base, NoiseFamily::kDegenerate, 0.0);
  Rng rng(5);
  const std::vector<double> g{0.1, 0.2, 0.7};
  for (int k = 0; k < 100; ++k) CHECK(env.sample_reward(2, 2, g, rng) == base->reward(2, 2, g));
}

TEST_CASE("uniform noise is bounded and unbiased") {
  auto base = std::make_shared<WarehouseEnv>();
  const StochasticRewardEnv env(base, NoiseFamily::kUniform, 0.5);
  Rng rng(6);
  const std::vector<double> g{0.5, 0.3, 0.2};
  const double mean = base->reward(0, 1, g);
  const int draws = 100000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double r = env.sample_reward(0, 1, g, rng);
    CHECK(r >= env.support_low());
    CHECK(r <= env.support_high());
    CHECK(r >= mean - 0.5);
    CHECK(r <= mean + 0.5);
    sum += r;
  }
  // Uniform on a width-1 interval has sd 1/sqrt(12).
  const double sigma = (1.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(sum / draws - mean) <= 3.0 * sigma);
}

TEST_CASE("stochastic env rejects bad parameters") {
  CHECK_THROWS(StochasticRewardEnv(nullptr, NoiseFamily::kUniform, 0.5));
  CHECK_THROWS(StochasticRewardEnv(std::make_shared<WarehouseEnv>(), NoiseFamily::kUniform, -1.0));
}
