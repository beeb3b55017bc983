#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmfs/config.hpp"
#include "gmfs/execution.hpp"

namespace gmfs {

std::string code_version();

/// "# config_hash=<hash>,version=<version>", the first line of every CSV.
std::string provenance_line(const ExperimentConfig& config);

/// Seed handed to run_episode for a user-facing seed. Mixing in the master
/// seed keeps seed lists reusable across experiments; the same seed is used
/// for every kappa so comparisons across kappa are paired.
std::uint64_t episode_seed(const ExperimentConfig& config, std::uint64_t seed);

struct SweepRow {
  std::uint32_t kappa = 0;
  std::uint64_t table_size = 0;
  std::uint32_t train_iterations = 0;
  double train_residual = 0.0;
  bool converged = false;
  double max_q_norm = 0.0;  // largest sup norm over all iterates
  double train_wall_time_s = 0.0;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  std::vector<double> returns;
  std::optional<double> baseline_mean;
  std::optional<double> baseline_stderr;
  std::string status = "ok";  // or the error message of a failed kappa
  /// Trained table, kept only when [output] save_qtables is set.
  std::shared_ptr<const QTable> q;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string config_hash;
  std::string version;
};

/// Trains and evaluates every kappa in the config. A failing kappa records its
/// error in `status` and the sweep moves on.
SweepReport run_sweep(const ExperimentConfig& config,
                      const std::function<void(const SweepRow&)>& on_row = {});

/// Deterministic CSV (no wall times):
/// kappa,table_size,train_iterations,train_residual,converged,mean_return,
/// stderr_return,baseline_mean,baseline_stderr,status
std::string sweep_csv(const SweepReport& report, const ExperimentConfig& config);
/// kappa,train_wall_time_s
std::string timing_csv(const SweepReport& report, const ExperimentConfig& config);

/// Writes sweep.csv (and sweep_timing.csv, q_kappa<K>.bin when enabled) under
/// config.output.dir, or `dir` when given. Returns the sweep.csv path.
std::string write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config,
                                const std::string& dir = {});

enum class Suite { kContraction, kConcentration, kLipschitz, kHtUnbiasedness, kOffPolicy };

std::string suite_name(Suite suite);
Suite parse_suite(const std::string& name);
std::vector<Suite> all_suites();

struct DiagnosticMetric {
  std::string name;
  double value;
};

struct DiagnosticResult {
  Suite suite;
  bool passed = false;
  std::vector<DiagnosticMetric> metrics;
};

/// Runs each requested property suite at the scale set in [diagnose].
/// An empty suite list is a ConfigError.
std::vector<DiagnosticResult> run_diagnostics(const ExperimentConfig& config,
                                              std::span<const Suite> suites);

/// suite,metric,value rows plus one suite,passed,0|1 row per suite.
std::string diagnostics_csv(const std::vector<DiagnosticResult>& results,
                            const ExperimentConfig& config);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gmfs
