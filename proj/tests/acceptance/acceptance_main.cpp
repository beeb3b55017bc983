// Acceptance checks for the library as a whole. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gmfs/bellman.hpp"
#include "gmfs/config.hpp"
#include "gmfs/env.hpp"
#include "gmfs/graphon.hpp"
#include "gmfs/harness.hpp"
#include "gmfs/sampler.hpp"
#include "oracles.hpp"
#include "surrogate_oracle.hpp"

using namespace gmfs;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("criterion {:>2}: {} - {} ({}; {:.1f}s)\n", id, out.passed ? "PASS" : "FAIL", title,
             out.detail, secs);
  std::fflush(stdout);
  if (!out.passed) ++failures;
}

constexpr double kGamma = 0.95;

std::shared_ptr<const Environment> toy2() {
  return std::make_shared<TabularEnv>(TabularEnv::toy2());
}

// The brute-force-enumerable instance: |S| = |A| = 2, kappa = 2, joint mode.
SurrogateModel small_model() { return SurrogateModel(toy2(), {Mode::kJoint, 2, kGamma}); }

Histogram hist_of(const QTable& q, std::uint64_t rank) {
  const Alphabet alphabet = q.mode() == Mode::kJoint
                                ? Alphabet::product(q.n_states(), q.n_actions())
                                : Alphabet(q.n_states());
  return Histogram(alphabet, q.index().unrank(rank));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double pooled(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

int main() {
  // Reference warehouse sweep shared by criteria 1, 2, 3 and 5.
  const ExperimentConfig reference = load_config(GMFS_CONFIG_DIR "/warehouse.ini");
  SweepReport sweep;
  double sweep_secs = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    sweep = run_sweep(reference, [](const SweepRow& r) {
      fmt::print("  sweep kappa={:>2} entries={:>4} sweeps={:>3} residual={:.2e} mean={:.3f} se={:.3f}"
                 " baseline={:.3f} {}\n",
                 r.kappa, r.table_size, r.train_iterations, r.train_residual, r.mean_return,
                 r.stderr_return, r.baseline_mean.value_or(NAN), r.status);
      std::fflush(stdout);
    });
    sweep_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("  reference sweep finished in {:.1f}s\n", sweep_secs);
  }

  report(1, "value iteration converges within 250 sweeps for every kappa", [&] {
    std::string detail;
    bool ok = sweep.rows.size() == reference.train.kappa_list.size();
    std::uint32_t worst = 0;
    for (const auto& r : sweep.rows) {
      const bool row_ok = r.status == "ok" && r.converged && r.train_iterations <= 250 &&
                          r.train_residual < 1e-4;
      if (!row_ok) detail += fmt::format("kappa={} failed; ", r.kappa);
      ok &= row_ok;
      worst = std::max(worst, r.train_iterations);
    }
    return Outcome{ok, detail + fmt::format("max sweeps {}", worst)};
  });

  report(2, "table sizes equal |S||A| C(kappa+2, 2)", [&] {
    bool ok = !sweep.rows.empty();
    std::uint64_t at24 = 0;
    for (const auto& r : sweep.rows) {
      ok &= r.table_size == 9 * oracle::choose(r.kappa + 2, 2);
      if (r.kappa == 24) at24 = r.table_size;
    }
    ok &= at24 == 2925;
    return Outcome{ok, fmt::format("kappa=24 -> {} entries", at24)};
  });

  report(3, "mean return non-decreasing in kappa; kappa=9 near kappa=24", [&] {
    bool ok = sweep.rows.size() >= 2;
    std::string detail;
    for (std::size_t k = 0; k + 1 < sweep.rows.size(); ++k) {
      const auto& a = sweep.rows[k];
      const auto& b = sweep.rows[k + 1];
      if (b.mean_return < a.mean_return - pooled(a.stderr_return, b.stderr_return)) {
        ok = false;
        detail += fmt::format("drop {}->{}; ", a.kappa, b.kappa);
      }
    }
    const SweepRow* r9 = nullptr;
    const SweepRow* r24 = nullptr;
    for (const auto& r : sweep.rows) {
      if (r.kappa == 9) r9 = &r;
      if (r.kappa == 24) r24 = &r;
    }
    if (!r9 || !r24) return Outcome{false, "kappa 9 or 24 missing"};
    const double gap = std::abs(r9->mean_return - r24->mean_return);
    const double tol = 2.0 * pooled(r9->stderr_return, r24->stderr_return);
    ok &= gap <= tol;
    return Outcome{ok, detail + fmt::format("kappa=1 {:.3f}, kappa=9 {:.3f}, kappa=24 {:.3f}, "
                                            "|9-24|={:.3g} <= {:.3g}",
                                            sweep.rows.front().mean_return, r9->mean_return,
                                            r24->mean_return, gap, tol)};
  });

  report(4, "operator contraction on 100 random pairs", [&] {
    const SurrogateModel model = small_model();
    Rng rng(StreamTag::kDiagnostic, {4});
    const double scale = model.env().reward_bound() / (1.0 - kGamma);
    double worst = 0.0;
    bool ok = true;
    for (int pair = 0; pair < 100; ++pair) {
      QTable q1 = model.make_table();
      QTable q2 = model.make_table();
      for (double& v : q1.values()) v = scale * (2.0 * rng.uniform() - 1.0);
      for (double& v : q2.values()) v = scale * (2.0 * rng.uniform() - 1.0);
      const double d = sup_distance(q1, q2);
      const double dt = sup_distance(model.apply_exact(q1), model.apply_exact(q2));
      const double de = sup_distance(model.apply_empirical(q1, 50, pair), model.apply_empirical(q2, 50, pair));
      ok &= dt <= kGamma * d + 1e-12 && de <= kGamma * d + 1e-12;
      worst = std::max({worst, dt / d, de / d});
    }
    return Outcome{ok, fmt::format("max ratio {:.4f} vs gamma {}", worst, kGamma)};
  });

  report(5, "every training iterate stays within reward_bound / (1 - gamma)", [&] {
    bool ok = !sweep.rows.empty();
    double worst = 0.0;
    for (const auto& r : sweep.rows) {
      ok &= r.max_q_norm <= 20.0 / (1.0 - kGamma) + 1e-9;
      worst = std::max(worst, r.max_q_norm);
    }
    // Small-instance runs, exact and sampled.
    const SurrogateModel model = small_model();
    for (bool exact : {true, false}) {
      ValueIterationOptions opts;
      opts.exact = exact;
      opts.epsilon = 0.0;
      opts.max_sweeps = 300;
      const auto res = value_iteration(model, opts);
      for (double n : res.sup_norms) ok &= n <= model.env().reward_bound() / (1.0 - kGamma) + 1e-9;
    }
    return Outcome{ok, fmt::format("warehouse max |Q| {:.3f} <= 400", worst)};
  });

  report(6, "geometric residual decay of exact value iteration", [&] {
    const SurrogateModel model = small_model();
    ValueIterationOptions opts;
    opts.exact = true;
    opts.epsilon = 0.0;
    opts.max_sweeps = 1000;
    const auto res = value_iteration(model, opts);
    // A sweep evaluates each entry to within a few dozen ulps of |Q|, so the
    // ratio is only informative while 1e-9 * residual exceeds that rounding.
    // Below this floor the additive form r_{t+1} <= gamma r_t + 1e-12 is checked.
    bool ok = true;
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t t = 0; t + 1 < res.residuals.size(); ++t) {
      const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * res.sup_norms[t + 1];
      ok &= res.residuals[t + 1] <= kGamma * res.residuals[t] + 1e-12;
      if (1e-9 * res.residuals[t] < rounding) continue;
      const double ratio = res.residuals[t + 1] / res.residuals[t];
      worst = std::max(worst, ratio);
      ok &= ratio <= kGamma + 1e-9;
      ++checked;
    }
    return Outcome{ok && checked > 100,
                   fmt::format("{} ratios above the rounding floor, max {:.9f}", checked, worst)};
  });

  report(7, "empirical operator at m=1e5 within 3 span / sqrt(m) of the exact expectation", [&] {
    const SurrogateModel model = small_model();
    const double bound = model.env().reward_bound() / (1.0 - kGamma);
    const double span = 2.0 * bound;
    const std::uint32_t m = 100000;
    QTable q = model.make_table();
    Rng rng(StreamTag::kDiagnostic, {7});
    for (double& v : q.values()) v = bound * (2.0 * rng.uniform() - 1.0);
    const oracle::SurrogateSpec spec{&model.env(), true, 2, kGamma, true, false};
    double worst = 0.0;
    bool ok = true;
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::uint64_t h = 0; h < q.n_histograms(); ++h) {
          const Histogram z = hist_of(q, h);
          const std::vector<std::uint32_t> counts(z.counts().begin(), z.counts().end());
          const double exact = oracle::exact_operator(spec, q, s, a, counts);
          Rng draw(StreamTag::kDiagnostic, {7, s, a, h});
          const double emp = model.empirical_operator(q, s, a, z, m, draw);
          worst = std::max(worst, std::abs(emp - exact));
          ok &= std::abs(emp - exact) <= 3.0 * span / std::sqrt(static_cast<double>(m));
        }
      }
    }
    return Outcome{ok, fmt::format("max gap {:.4g} vs {:.4g}", worst, 3.0 * span / std::sqrt(1e5))};
  });

  report(8, "TV concentration bound violated in at most delta + 3 sigma of trials", [&] {
    const auto weights = make_weights(reference);
    const NeighborSampler sampler(weights);
    const std::size_t n = weights.n();
    Rng rng(StreamTag::kDiagnostic, {8});
    std::vector<std::size_t> states(n);
    for (auto& s : states) s = rng.below(3);
    const double delta = 0.05;
    const int trials = 10000;
    const double limit = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trials);
    bool ok = true;
    std::string detail;
    for (std::size_t kappa : {10u, 50u, 200u}) {
      const double bound = tv_concentration_bound(3, kappa, delta);
      int violations = 0;
      for (int t = 0; t < trials; ++t) {
        const std::size_t agent = static_cast<std::size_t>(t) % n;
        const auto target = exact_state_aggregate(weights, agent, states, 3);
        const auto g = empirical_marginal(sample_neighbors(sampler, agent, kappa, rng), states, 3);
        violations += tv_distance(g, target) > bound;
      }
      const double rate = violations / static_cast<double>(trials);
      ok &= rate <= limit;
      detail += fmt::format("kappa={} rate={:.4f} ", kappa, rate);
    }
    return Outcome{ok, detail + fmt::format("limit {:.4f}", limit)};
  });

  report(9, "Horvitz-Thompson estimate unbiased within 5 sigma per cell", [&] {
    const std::size_t n = 10;
    const std::size_t kappa = 5;
    const auto w = build_weights(Graphon::exp_decay(2.0), LatentAssignment::sequential(n));
    Rng rng(StreamTag::kDiagnostic, {9});
    std::vector<std::size_t> states(n), actions(n);
    for (auto& s : states) s = rng.below(3);
    for (auto& a : actions) a = rng.below(3);
    std::vector<double> q(n, 1.0 / static_cast<double>(n - 1));
    q[0] = 0.0;
    // Oracle: direct weighted tally of the other agents.
    std::vector<double> exact(9, 0.0);
    double total = 0.0;
    for (std::size_t j = 1; j < n; ++j) total += w.raw(0, j);
    for (std::size_t j = 1; j < n; ++j) exact[states[j] * 3 + actions[j]] += w.raw(0, j) / total;
    const int reps = 100000;
    std::vector<double> sum(9, 0.0), sumsq(9, 0.0);
    for (int r = 0; r < reps; ++r) {
      const auto est = ht_estimate(w, 0, q, kappa, states, actions, 3, 3, rng);
      for (std::size_t c = 0; c < 9; ++c) {
        sum[c] += est.estimate[c];
        sumsq[c] += est.estimate[c] * est.estimate[c];
      }
    }
    bool ok = true;
    double worst = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      const double mean = sum[c] / reps;
      const double se = std::sqrt(std::max(0.0, sumsq[c] / reps - mean * mean) / reps);
      const double z = se > 0 ? std::abs(mean - exact[c]) / se : (mean == exact[c] ? 0.0 : 1e9);
      worst = std::max(worst, z);
      ok &= std::abs(mean - exact[c]) <= 5.0 * se + 1e-12;
    }
    return Outcome{ok, fmt::format("max |z| {:.3f}", worst)};
  });

  report(10, "off-policy learning within 5% of the value-iteration fixed point", [&] {
    const SurrogateModel model = small_model();
    ValueIterationOptions opts;
    opts.exact = true;
    opts.epsilon = 1e-12;
    opts.max_sweeps = 5000;
    const auto vi = value_iteration(model, opts);
    OffPolicyConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.steps = 1000000;
    cfg.seed = 10;
    const QTable q = off_policy_learning(model, cfg);
    const double err = sup_distance(q, vi.q);
    const double tol = 0.05 * vi.q.sup_norm();
    return Outcome{vi.converged && err <= tol,
                   fmt::format("error {:.4f} vs {:.4f} (|Q*| {:.3f})", err, tol, vi.q.sup_norm())};
  });

  report(11, "stochastic-reward error non-increasing in Xi (median of 10 seeds)", [&] {
    const auto env = std::make_shared<WarehouseEnv>();
    const SurrogateModel model(env, {Mode::kMarginal, 2, kGamma});
    const StochasticRewardEnv noisy(env, NoiseFamily::kUniform, 1.0);
    ValueIterationOptions opts;
    opts.exact = true;
    opts.epsilon = 0.0;
    opts.max_sweeps = 150;
    const auto det = value_iteration(model, opts);
    std::vector<double> medians;
    for (std::uint32_t xi : {1u, 10u, 100u}) {
      std::vector<double> gaps;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        opts.seed = seed;
        gaps.push_back(sup_distance(value_iteration_stochastic(model, noisy, xi, opts).q, det.q));
      }
      std::sort(gaps.begin(), gaps.end());
      medians.push_back(0.5 * (gaps[4] + gaps[5]));
    }
    const bool ok = medians[1] <= medians[0] && medians[2] <= medians[1];
    return Outcome{ok, fmt::format("medians {:.4f}, {:.4f}, {:.4f}", medians[0], medians[1], medians[2])};
  });

  report(12, "sweep CSVs byte-identical across runs and thread counts", [&] {
    const std::filesystem::path root =
        std::filesystem::temp_directory_path() / fmt::format("gmfs_acceptance_{}", ::getpid());
    std::filesystem::remove_all(root);
    std::vector<std::string> csvs;
    std::vector<std::string> q24;
    for (const char* threads : {"1", "1", "8", "8"}) {
      const auto dir = root / fmt::format("run{}", csvs.size());
      const std::string cmd = fmt::format("GMFS_THREADS={} \"{}\" sweep --config \"{}\" --out \"{}\" > /dev/null",
                                          threads, GMFS_CLI_PATH, GMFS_CONFIG_DIR "/determinism.ini",
                                          dir.string());
      if (std::system(cmd.c_str()) != 0) return Outcome{false, "sweep command failed: " + cmd};
      csvs.push_back(read_file(dir / "sweep.csv"));
      q24.push_back(read_file(dir / "q_kappa6.bin"));
    }
    bool ok = !csvs[0].empty();
    for (std::size_t k = 1; k < csvs.size(); ++k) ok &= csvs[k] == csvs[0] && q24[k] == q24[0];
    std::filesystem::remove_all(root);
    return Outcome{ok, fmt::format("4 runs, {} bytes of CSV", csvs[0].size())};
  });

  fmt::print("{} of 12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
