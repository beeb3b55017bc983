// gmfs: train, execute, sweep, diagnose and inspect from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 budget exceeded, 4 a diagnostic suite failed.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "gmfs/bellman.hpp"
#include "gmfs/config.hpp"
#include "gmfs/errors.hpp"
#include "gmfs/execution.hpp"
#include "gmfs/harness.hpp"
#include "gmfs/qtable.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitDiagnose = 4;

gmfs::ExperimentConfig read_config(const std::string& path) {
  return path.empty() ? gmfs::parse_config("") : gmfs::load_config(path);
}

int cmd_train(const std::string& config_path, std::uint32_t kappa, const std::string& out,
              bool exact) {
  auto config = read_config(config_path);
  if (exact) config.train.exact = true;
  if (kappa == 0) kappa = config.train.kappa_list.front();
  if (kappa > config.n - 1) {
    throw gmfs::ConfigError(fmt::format("--kappa {} outside [1, n-1] = [1, {}]", kappa, config.n - 1));
  }
  const auto env = gmfs::make_environment(config.env);
  const gmfs::SurrogateModel model(env, gmfs::surrogate_settings(config, kappa));
  const auto options = gmfs::train_options(config, kappa);
  const auto start = std::chrono::steady_clock::now();
  gmfs::ValueIterationResult result =
      config.train.xi > 1 || config.env.noise != gmfs::NoiseFamily::kDegenerate
          ? gmfs::value_iteration_stochastic(
                model,
                gmfs::StochasticRewardEnv(env, config.env.noise, config.env.noise_half_width),
                config.train.xi, options)
          : gmfs::value_iteration(model, options);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  gmfs::save_qtable(result.q, out);
  fmt::print("kappa={} mode={} entries={} sweeps={} residual={:.3g} converged={} time={:.2f}s -> {}\n",
             kappa, gmfs::to_string(result.q.mode()), result.q.size(), result.sweeps,
             result.q.meta().residual, result.converged ? "yes" : "no", secs, out);
  return 0;
}

int cmd_execute(const std::string& config_path, const std::string& qtable,
                const std::string& seeds_text, const std::string& out, bool baseline) {
  const auto config = read_config(config_path);
  const auto env = gmfs::make_environment(config.env);
  gmfs::QTable q = gmfs::load_qtable(qtable);
  if (q.n_states() != env->n_states() || q.n_actions() != env->n_actions()) {
    throw gmfs::DimensionError(fmt::format(
        "Q-table has |S|={}, |A|={} but environment '{}' has |S|={}, |A|={}", q.n_states(),
        q.n_actions(), env->name(), env->n_states(), env->n_actions()));
  }
  const std::uint32_t kappa = q.kappa();
  const auto seeds = seeds_text.empty() ? config.execute.seeds : gmfs::parse_seed_list(seeds_text);
  const gmfs::WeightMatrix weights = gmfs::make_weights(config);
  const gmfs::Policy policy(std::move(q));
  gmfs::ExecutionSettings exec = gmfs::execution_settings(config, kappa);
  if (baseline) exec.policy_input = gmfs::AggregateSource::kExact;

  std::vector<std::uint64_t> mixed;
  for (auto s : seeds) mixed.push_back(gmfs::episode_seed(config, s));
  const auto summary = gmfs::evaluate_policy(*env, weights, policy, exec, mixed);

  std::string csv = gmfs::provenance_line(config);
  csv += "seed,kappa,horizon,discounted_return,wall_time_ms\n";
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    csv += fmt::format("{},{},{},{},{:.3f}\n", seeds[k], kappa, exec.horizon, summary.returns[k],
                       summary.wall_time_ms[k]);
  }
  gmfs::write_text_file(out, csv);
  fmt::print("kappa={} seeds={} mean_return={:.4f} stderr={:.4f} -> {}\n", kappa, seeds.size(),
             summary.mean, summary.std_error, out);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const auto config = read_config(config_path);
  const auto report = gmfs::run_sweep(config, [](const gmfs::SweepRow& r) {
    fmt::print("kappa={:>3} entries={:>6} sweeps={:>4} residual={:.3g} mean={:.4f} se={:.4f} {}\n",
               r.kappa, r.table_size, r.train_iterations, r.train_residual, r.mean_return,
               r.stderr_return, r.status);
    std::fflush(stdout);
  });
  const std::string path = gmfs::write_sweep_outputs(report, config, out_dir);
  fmt::print("wrote {}\n", path);
  const bool any_failed = std::any_of(report.rows.begin(), report.rows.end(),
                                      [](const auto& r) { return r.status != "ok"; });
  return any_failed ? kExitRuntime : 0;
}

int cmd_diagnose(const std::string& config_path, const std::vector<std::string>& suite_names,
                 const std::string& out_dir) {
  const auto config = read_config(config_path);
  std::vector<gmfs::Suite> suites;
  for (const auto& name : suite_names) {
    if (name == "all") {
      for (auto s : gmfs::all_suites()) suites.push_back(s);
    } else {
      suites.push_back(gmfs::parse_suite(name));
    }
  }
  if (suite_names.empty()) suites = gmfs::all_suites();
  const auto results = gmfs::run_diagnostics(config, suites);
  bool all_passed = true;
  for (const auto& r : results) {
    fmt::print("{:<16} {}\n", gmfs::suite_name(r.suite), r.passed ? "PASS" : "FAIL");
    for (const auto& m : r.metrics) fmt::print("  {:<24} {}\n", m.name, m.value);
    all_passed &= r.passed;
  }
  const std::string dir = out_dir.empty() ? config.output.dir : out_dir;
  const std::string path = (std::filesystem::path(dir) / "diagnostics.csv").string();
  gmfs::write_text_file(path, gmfs::diagnostics_csv(results, config));
  fmt::print("wrote {}\n", path);
  return all_passed ? 0 : kExitDiagnose;
}

int cmd_inspect(const std::string& path) {
  const gmfs::QTable q = gmfs::load_qtable(path);
  const auto v = q.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  fmt::print("file        {}\n", path);
  fmt::print("env         {}\n", q.meta().env_name);
  fmt::print("mode        {}\n", gmfs::to_string(q.mode()));
  fmt::print("|S|, |A|    {}, {}\n", q.n_states(), q.n_actions());
  fmt::print("kappa       {}\n", q.kappa());
  fmt::print("histograms  {}\n", q.n_histograms());
  fmt::print("entries     {}\n", q.size());
  fmt::print("gamma       {}\n", q.meta().gamma);
  fmt::print("residual    {}\n", q.meta().residual);
  fmt::print("seed        {}\n", q.meta().seed);
  fmt::print("min / max   {} / {}\n", *lo, *hi);
  fmt::print("mean        {}\n", sum / static_cast<double>(v.size()));
  fmt::print("sup norm    {}\n", q.sup_norm());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphon mean-field subsampling: offline training and decentralized execution"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

  std::string config_path;
  std::string out;

  auto* train = app.add_subcommand("train", "Train a Q-table for one kappa");
  std::uint32_t kappa = 0;
  bool exact = false;
  train->add_option("--config", config_path, "Experiment config (INI)");
  train->add_option("--kappa", kappa, "Subsample size (default: first of kappa_list)");
  train->add_option("--out", out, "Output Q-table file")->required();
  train->add_flag("--exact", exact, "Use the exact operator instead of sampling");

  auto* execute = app.add_subcommand("execute", "Run episodes with a trained Q-table");
  std::string qtable;
  std::string seeds;
  bool baseline = false;
  execute->add_option("--config", config_path, "Experiment config (INI)");
  execute->add_option("--qtable", qtable, "Q-table file")->required();
  execute->add_option("--seeds", seeds, "Half-open range a..b or comma list");
  execute->add_option("--out", out, "Episodes CSV")->required();
  execute->add_flag("--baseline-exact", baseline, "Feed the policy exact aggregates");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate every kappa in the config");
  sweep->add_option("--config", config_path, "Experiment config (INI)");
  sweep->add_option("--out", out, "Output directory (default: [output] dir)");

  auto* diagnose = app.add_subcommand("diagnose", "Run property suites");
  std::vector<std::string> suites;
  diagnose->add_option("--config", config_path, "Experiment config (INI)");
  diagnose->add_option("--suite", suites,
                       "contraction | concentration | lipschitz | ht_unbiasedness | offpolicy | all")
      ->delimiter(',');
  diagnose->add_option("--out", out, "Output directory (default: [output] dir)");

  auto* inspect = app.add_subcommand("inspect", "Print a Q-table header and statistics");
  std::string inspect_path;
  inspect->add_option("qtable", inspect_path, "Q-table file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    if (*train) return cmd_train(config_path, kappa, out, exact);
    if (*execute) return cmd_execute(config_path, qtable, seeds, out, baseline);
    if (*sweep) return cmd_sweep(config_path, out);
    if (*diagnose) return cmd_diagnose(config_path, suites, out);
    if (*inspect) return cmd_inspect(inspect_path);
  } catch (const gmfs::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const gmfs::BudgetError& e) {
    fmt::print(stderr, "budget error: {}\n", e.what());
    return kExitBudget;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
