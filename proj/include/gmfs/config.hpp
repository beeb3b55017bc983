#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gmfs/bellman.hpp"
#include "gmfs/env.hpp"
#include "gmfs/execution.hpp"
#include "gmfs/graphon.hpp"
#include "gmfs/qtable.hpp"

namespace gmfs {

struct EnvConfig {
  std::string name = "warehouse";  // warehouse | toy2 | tabular
  std::string file;                // tabular only
  WarehouseParams warehouse;
  NoiseFamily noise = NoiseFamily::kDegenerate;
  double noise_half_width = 0.0;
};

struct GraphonConfig {
  std::string kind = "radial";  // radial | exp_decay | block | uniform
  double radius = 0.3;
  double beta = 1.0;
  std::vector<double> boundaries;
  std::vector<std::vector<double>> block_values;
  std::string latent = "grid";  // grid | sequential | explicit
  std::vector<LatentPoint> points;
};

struct TrainConfig {
  double gamma = 0.95;
  std::uint32_t iterations = 250;
  std::uint32_t samples = 50;
  double epsilon = 1e-4;
  std::vector<std::uint32_t> kappa_list{1, 3, 6, 9, 12, 15, 18, 21, 24};
  std::uint32_t xi = 1;  // reward realizations averaged per entry
  Mode mode = Mode::kMarginal;
  SurrogateAggregate surrogate_aggregate = SurrogateAggregate::kLeaveOneOut;
  std::optional<NeighborActionRule> neighbor_action_rule;  // unset: per-mode default
  bool exact = false;
  std::uint64_t exact_cap = 1'000'000;
  bool resample_each_sweep = false;
};

struct ExecuteConfig {
  std::uint32_t horizon = 100;
  std::vector<std::uint64_t> seeds;  // default 0..29
  InitialStates init = InitialStates::fixed(0);
  AggregateSource reward_source = AggregateSource::kExact;
  bool baseline_exact = false;  // also evaluate with exact aggregates as policy input
};

struct DiagnoseConfig {
  std::uint32_t pairs = 100;
  std::uint32_t small_kappa = 2;
  std::vector<std::uint32_t> concentration_kappas{10, 50, 200};
  double delta = 0.05;
  std::uint32_t trials = 10'000;
  std::uint32_t ht_n = 10;
  std::uint32_t ht_kappa = 5;
  std::uint32_t ht_replications = 100'000;
  std::uint32_t lipschitz_n = 5;
  std::uint32_t lipschitz_kappa = 2;
  std::uint32_t lipschitz_sweeps = 40;
  std::uint64_t offpolicy_steps = 1'000'000;
  double offpolicy_alpha = 0.05;
};

struct OutputConfig {
  std::string dir = "out";
  /// Also write per-kappa wall times (a CSV that differs run to run).
  bool timing = false;
  bool save_qtables = false;
};

struct ExperimentConfig {
  std::string name = "warehouse";
  std::size_t n = 25;
  std::uint64_t master_seed = 0;
  EnvConfig env;
  GraphonConfig graphon;
  TrainConfig train;
  ExecuteConfig execute;
  DiagnoseConfig diagnose;
  OutputConfig output;
};

/// Parses sectioned key = value text. Missing keys take the defaults above;
/// unknown sections or keys and out-of-range values raise ConfigError naming
/// the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every key, fixed order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Parses "a..b" (half-open) or a comma list of non-negative integers.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

std::shared_ptr<const Environment> make_environment(const EnvConfig& env);
Graphon make_graphon(const GraphonConfig& graphon);
LatentAssignment make_assignment(const GraphonConfig& graphon, std::size_t n);
WeightMatrix make_weights(const ExperimentConfig& config);
SurrogateSettings surrogate_settings(const ExperimentConfig& config, std::uint32_t kappa);
ValueIterationOptions train_options(const ExperimentConfig& config, std::uint32_t kappa);
ExecutionSettings execution_settings(const ExperimentConfig& config, std::uint32_t kappa);

}  // namespace gmfs
