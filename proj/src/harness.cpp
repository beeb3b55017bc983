#include "gmfs/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gmfs/bellman.hpp"
#include "gmfs/errors.hpp"
#include "gmfs/rng.hpp"
#include "gmfs/sampler.hpp"

namespace gmfs {

namespace fs = std::filesystem;

std::string code_version() { return GMFS_VERSION; }

std::string provenance_line(const ExperimentConfig& config) {
  return fmt::format("# config_hash={},version={}\n", config_hash(config), code_version());
}

std::uint64_t episode_seed(const ExperimentConfig& config, std::uint64_t seed) {
  return stream_key({config.master_seed, static_cast<std::uint64_t>(StreamTag::kInit), seed});
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path);
}

SweepReport run_sweep(const ExperimentConfig& config,
                      const std::function<void(const SweepRow&)>& on_row) {
  SweepReport report;
  report.config_hash = config_hash(config);
  report.version = code_version();
  const auto env = make_environment(config.env);
  const WeightMatrix weights = make_weights(config);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s : config.execute.seeds) seeds.push_back(episode_seed(config, s));

  for (std::uint32_t kappa : config.train.kappa_list) {
    SweepRow row;
    row.kappa = kappa;
    try {
      const SurrogateModel model(env, surrogate_settings(config, kappa));
      const QTable shape = model.make_table();
      row.table_size = shape.size();

      const auto start = std::chrono::steady_clock::now();
      ValueIterationResult trained =
          config.train.xi > 1 || config.env.noise != NoiseFamily::kDegenerate
              ? value_iteration_stochastic(
                    model, StochasticRewardEnv(env, config.env.noise, config.env.noise_half_width),
                    config.train.xi, train_options(config, kappa))
              : value_iteration(model, train_options(config, kappa));
      row.train_wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.train_iterations = trained.sweeps;
      row.train_residual = trained.residuals.empty() ? 0.0 : trained.residuals.back();
      row.converged = trained.converged;
      for (double v : trained.sup_norms) row.max_q_norm = std::max(row.max_q_norm, v);
      spdlog::info("kappa={} trained: {} sweeps, residual {:.3g}, {:.2f}s", kappa, row.train_iterations,
                   row.train_residual, row.train_wall_time_s);

      auto table = std::make_shared<const QTable>(std::move(trained.q));
      if (config.output.save_qtables) row.q = table;
      const Policy policy(table);
      ExecutionSettings exec = execution_settings(config, kappa);
      const PolicySummary summary = evaluate_policy(*env, weights, policy, exec, seeds);
      row.mean_return = summary.mean;
      row.stderr_return = summary.std_error;
      row.returns = summary.returns;
      if (config.execute.baseline_exact) {
        exec.policy_input = AggregateSource::kExact;
        const PolicySummary base = evaluate_policy(*env, weights, policy, exec, seeds);
        row.baseline_mean = base.mean;
        row.baseline_stderr = base.std_error;
      }
    } catch (const Error& err) {
      row.status = err.what();
      spdlog::error("kappa={} failed: {}", kappa, err.what());
    }
    if (on_row) on_row(row);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string sweep_csv(const SweepReport& report, const ExperimentConfig& config) {
  std::string out = provenance_line(config);
  out +=
      "kappa,table_size,train_iterations,train_residual,converged,mean_return,stderr_return,"
      "baseline_mean,baseline_stderr,status\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.kappa, r.table_size,
                       r.train_iterations, num(r.train_residual), r.converged ? 1 : 0,
                       num(r.mean_return), num(r.stderr_return),
                       r.baseline_mean ? num(*r.baseline_mean) : "",
                       r.baseline_stderr ? num(*r.baseline_stderr) : "", csv_field(r.status));
  }
  return out;
}

std::string timing_csv(const SweepReport& report, const ExperimentConfig& config) {
  std::string out = provenance_line(config) + "kappa,train_wall_time_s\n";
  for (const auto& r : report.rows) out += fmt::format("{},{:.3f}\n", r.kappa, r.train_wall_time_s);
  return out;
}

std::string write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config,
                                const std::string& dir) {
  const fs::path base(dir.empty() ? config.output.dir : dir);
  const std::string path = (base / "sweep.csv").string();
  write_text_file(path, sweep_csv(report, config));
  if (config.output.timing) {
    write_text_file((base / "sweep_timing.csv").string(), timing_csv(report, config));
  }
  for (const auto& row : report.rows) {
    if (row.q) save_qtable(*row.q, (base / fmt::format("q_kappa{}.bin", row.kappa)).string());
  }
  return path;
}

std::string suite_name(Suite suite) {
  switch (suite) {
    case Suite::kContraction: return "contraction";
    case Suite::kConcentration: return "concentration";
    case Suite::kLipschitz: return "lipschitz";
    case Suite::kHtUnbiasedness: return "ht_unbiasedness";
    case Suite::kOffPolicy: return "offpolicy";
  }
  return "?";
}

Suite parse_suite(const std::string& name) {
  for (Suite s : all_suites()) {
    if (suite_name(s) == name) return s;
  }
  throw ConfigError("unknown diagnostic suite '" + name +
                    "' (expected contraction | concentration | lipschitz | ht_unbiasedness | "
                    "offpolicy)");
}

std::vector<Suite> all_suites() {
  return {Suite::kContraction, Suite::kConcentration, Suite::kLipschitz, Suite::kHtUnbiasedness,
          Suite::kOffPolicy};
}

namespace {

std::uint64_t diag_key(const ExperimentConfig& c, Suite s) {
  return stream_key({c.master_seed, static_cast<std::uint64_t>(s)});
}

void fill_uniform(QTable& q, double bound, Rng& rng) {
  for (double& v : q.values()) v = bound * (2.0 * rng.uniform() - 1.0);
}

// gamma-contraction of the exact and empirical operators on random table pairs.
DiagnosticResult contraction_suite(const ExperimentConfig& c) {
  auto env = std::make_shared<TabularEnv>(TabularEnv::toy2());
  SurrogateSettings st;
  st.mode = Mode::kJoint;
  st.kappa = c.diagnose.small_kappa;
  st.gamma = c.train.gamma;
  const SurrogateModel model(env, st);
  const double bound = env->reward_bound() / (1.0 - st.gamma);
  const std::uint64_t key = diag_key(c, Suite::kContraction);
  double worst_exact = 0.0;
  double worst_empirical = 0.0;
  bool ok = true;
  for (std::uint32_t p = 0; p < c.diagnose.pairs; ++p) {
    Rng rng(StreamTag::kDiagnostic, {key, p});
    QTable q1 = model.make_table();
    QTable q2 = model.make_table();
    fill_uniform(q1, bound, rng);
    fill_uniform(q2, bound, rng);
    const double d = sup_distance(q1, q2);
    const double de = sup_distance(model.apply_exact(q1), model.apply_exact(q2));
    const double dm = sup_distance(model.apply_empirical(q1, c.train.samples, key + p),
                                   model.apply_empirical(q2, c.train.samples, key + p));
    ok &= de <= st.gamma * d + 1e-12 && dm <= st.gamma * d + 1e-12;
    worst_exact = std::max(worst_exact, de / d);
    worst_empirical = std::max(worst_empirical, dm / d);
  }
  return {Suite::kContraction,
          ok,
          {{"pairs", static_cast<double>(c.diagnose.pairs)},
           {"gamma", st.gamma},
           {"max_ratio_exact", worst_exact},
           {"max_ratio_empirical", worst_empirical}}};
}

// Violation rate of the TV concentration bound for sampled neighbor marginals.
DiagnosticResult concentration_suite(const ExperimentConfig& c) {
  const auto env = make_environment(c.env);
  const WeightMatrix weights = make_weights(c);
  const NeighborSampler sampler(weights);
  const std::size_t ns = env->n_states();
  const std::size_t n = weights.n();
  const std::uint64_t key = diag_key(c, Suite::kConcentration);
  const double delta = c.diagnose.delta;
  const double trials = c.diagnose.trials;
  const double allowed = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trials);
  DiagnosticResult out{Suite::kConcentration, true, {{"allowed_rate", allowed}}};
  std::vector<std::size_t> states(n);
  std::vector<std::size_t> draws;
  std::vector<double> g_hat(ns);
  for (std::uint32_t kappa : c.diagnose.concentration_kappas) {
    const double bound = tv_concentration_bound(ns, kappa, delta);
    std::uint64_t violations = 0;
    double worst = 0.0;
    for (std::uint32_t k = 0; k < c.diagnose.trials; ++k) {
      Rng rng(StreamTag::kDiagnostic, {key, kappa, k});
      for (auto& s : states) s = static_cast<std::size_t>(rng.below(ns));
      const std::size_t agent = k % n;
      const auto g = exact_state_aggregate(weights, agent, states, ns);
      sampler.sample_into(agent, kappa, rng, draws);
      std::fill(g_hat.begin(), g_hat.end(), 0.0);
      for (std::size_t j : draws) g_hat[states[j]] += 1.0 / kappa;
      const double tv = tv_distance(g, g_hat);
      worst = std::max(worst, tv);
      if (tv > bound) ++violations;
    }
    const double rate = static_cast<double>(violations) / trials;
    out.passed &= rate <= allowed;
    out.metrics.push_back({fmt::format("bound_k{}", kappa), bound});
    out.metrics.push_back({fmt::format("violation_rate_k{}", kappa), rate});
    out.metrics.push_back({fmt::format("max_tv_k{}", kappa), worst});
  }
  return out;
}

// Compares exact iterates of the full (kappa = n - 1) and subsampled operators
// against the Lipschitz bound 4 r L_P TV / (1 - gamma).
DiagnosticResult lipschitz_suite(const ExperimentConfig& c) {
  const auto env = make_environment(c.env);
  const std::uint32_t full_kappa = c.diagnose.lipschitz_n - 1;
  const std::uint32_t sub_kappa = c.diagnose.lipschitz_kappa;
  SurrogateSettings st = surrogate_settings(c, full_kappa);
  const SurrogateModel full(env, st);
  st.kappa = sub_kappa;
  const SurrogateModel sub(env, st);
  const std::size_t ns = env->n_states();
  const std::size_t na = env->n_actions();

  // Measured TV-Lipschitz constant of the kernel over both histogram grids.
  std::vector<std::vector<double>> points;
  for (const auto* idx : {&full.marginal_index(), &sub.marginal_index()}) {
    for (std::uint64_t r = 0; r < idx->total(); ++r) {
      const auto counts = idx->unrank(r);
      std::vector<double> g(ns);
      for (std::size_t x = 0; x < ns; ++x) g[x] = static_cast<double>(counts[x]) / idx->kappa();
      points.push_back(std::move(g));
    }
  }
  double measured = 0.0;
  std::vector<double> p1(ns);
  std::vector<double> p2(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        env->transition(s, a, points[i], p1);
        for (std::size_t j = i + 1; j < points.size(); ++j) {
          const double tv_g = tv_distance(points[i], points[j]);
          if (tv_g <= 0.0) continue;
          env->transition(s, a, points[j], p2);
          measured = std::max(measured, tv_distance(p1, p2) / tv_g);
        }
      }
    }
  }
  const double lp = std::max(1.0, measured);
  const double scale = 4.0 * env->reward_bound() / (1.0 - c.train.gamma) * lp;

  QTable q_full = full.make_table();
  QTable q_sub = sub.make_table();
  double worst_ratio = 0.0;
  double gap_at_zero = 0.0;
  const std::size_t n_full = full.n_histograms();
  const std::size_t n_sub = sub.n_histograms();
  for (std::uint32_t t = 0; t < c.diagnose.lipschitz_sweeps; ++t) {
    q_full = full.apply_exact(q_full);
    q_sub = sub.apply_exact(q_sub);
    for (std::size_t h1 = 0; h1 < n_full; ++h1) {
      const auto& g1 = points[full.marginal_rank_of(h1)];
      for (std::size_t h2 = 0; h2 < n_sub; ++h2) {
        const auto& g2 = points[full.marginal_index().total() + sub.marginal_rank_of(h2)];
        const double tv = tv_distance(g1, g2);
        for (std::size_t s = 0; s < ns; ++s) {
          for (std::size_t a = 0; a < na; ++a) {
            const double gap = std::abs(q_full(s, a, h1) - q_sub(s, a, h2));
            if (tv > 0.0) {
              worst_ratio = std::max(worst_ratio, gap / (scale * tv));
            } else {
              gap_at_zero = std::max(gap_at_zero, gap);
            }
          }
        }
      }
    }
  }
  return {Suite::kLipschitz,
          worst_ratio <= 1.0,
          {{"measured_lp", measured},
           {"lp_used", lp},
           {"max_gap_over_bound", worst_ratio},
           {"max_gap_at_zero_tv", gap_at_zero}}};
}

// Per-cell mean of the Horvitz-Thompson estimate against the exact aggregate.
DiagnosticResult ht_suite(const ExperimentConfig& c) {
  const auto env = make_environment(c.env);
  const std::size_t ns = env->n_states();
  const std::size_t na = env->n_actions();
  const std::size_t n = c.diagnose.ht_n;
  const WeightMatrix weights =
      build_weights(Graphon::exp_decay(2.0), LatentAssignment::sequential(n));
  const std::uint64_t key = diag_key(c, Suite::kHtUnbiasedness);
  Rng setup(StreamTag::kDiagnostic, {key});
  std::vector<std::size_t> states(n);
  std::vector<std::size_t> actions(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i] = static_cast<std::size_t>(setup.below(ns));
    actions[i] = static_cast<std::size_t>(setup.below(na));
  }
  const std::vector<double> proposal(n, 1.0);
  const std::size_t agent = 0;
  const auto exact = exact_aggregate(weights, agent, states, actions, ns, na);
  std::vector<double> sum(ns * na, 0.0);
  std::vector<double> sum_sq(ns * na, 0.0);
  const std::uint32_t reps = c.diagnose.ht_replications;
  for (std::uint32_t k = 0; k < reps; ++k) {
    Rng rng(StreamTag::kDiagnostic, {key, 1, k});
    const auto est =
        ht_estimate(weights, agent, proposal, c.diagnose.ht_kappa, states, actions, ns, na, rng);
    for (std::size_t cell = 0; cell < sum.size(); ++cell) {
      sum[cell] += est.estimate[cell];
      sum_sq[cell] += est.estimate[cell] * est.estimate[cell];
    }
  }
  double worst_z = 0.0;
  bool ok = true;
  for (std::size_t cell = 0; cell < sum.size(); ++cell) {
    const double mean = sum[cell] / reps;
    const double var = std::max(0.0, sum_sq[cell] / reps - mean * mean) * reps / (reps - 1.0);
    const double se = std::sqrt(var / reps);
    const double err = std::abs(mean - exact[cell]);
    ok &= err <= 5.0 * se + 1e-12;
    if (se > 0.0) worst_z = std::max(worst_z, err / se);
  }
  return {Suite::kHtUnbiasedness,
          ok,
          {{"replications", static_cast<double>(reps)}, {"max_abs_z", worst_z}}};
}

// Off-policy Q-learning against the exact value-iteration fixed point.
DiagnosticResult offpolicy_suite(const ExperimentConfig& c) {
  auto env = std::make_shared<TabularEnv>(TabularEnv::toy2());
  SurrogateSettings st;
  st.mode = Mode::kJoint;
  st.kappa = c.diagnose.small_kappa;
  st.gamma = c.train.gamma;
  const SurrogateModel model(env, st);
  ValueIterationOptions vi;
  vi.exact = true;
  vi.max_sweeps = 5000;
  vi.epsilon = 1e-12;
  const QTable fixed_point = value_iteration(model, vi).q;
  OffPolicyConfig op;
  op.learning_rate = c.diagnose.offpolicy_alpha;
  op.steps = c.diagnose.offpolicy_steps;
  op.seed = diag_key(c, Suite::kOffPolicy);
  const QTable learned = off_policy_learning(model, op);
  const double rel = sup_distance(learned, fixed_point) / fixed_point.sup_norm();
  return {Suite::kOffPolicy,
          rel <= 0.05,
          {{"steps", static_cast<double>(op.steps)},
           {"alpha", op.learning_rate},
           {"fixed_point_norm", fixed_point.sup_norm()},
           {"relative_error", rel}}};
}

}  // namespace

std::vector<DiagnosticResult> run_diagnostics(const ExperimentConfig& config,
                                              std::span<const Suite> suites) {
  if (suites.empty()) throw ConfigError("run_diagnostics needs at least one suite");
  std::vector<DiagnosticResult> out;
  for (Suite s : suites) {
    switch (s) {
      case Suite::kContraction: out.push_back(contraction_suite(config)); break;
      case Suite::kConcentration: out.push_back(concentration_suite(config)); break;
      case Suite::kLipschitz: out.push_back(lipschitz_suite(config)); break;
      case Suite::kHtUnbiasedness: out.push_back(ht_suite(config)); break;
      case Suite::kOffPolicy: out.push_back(offpolicy_suite(config)); break;
    }
    spdlog::info("diagnostic {}: {}", suite_name(s), out.back().passed ? "pass" : "FAIL");
  }
  return out;
}

std::string diagnostics_csv(const std::vector<DiagnosticResult>& results,
                            const ExperimentConfig& config) {
  std::string out = provenance_line(config) + "suite,metric,value\n";
  for (const auto& r : results) {
    for (const auto& m : r.metrics) {
      out += fmt::format("{},{},{}\n", suite_name(r.suite), m.name, num(m.value));
    }
    out += fmt::format("{},passed,{}\n", suite_name(r.suite), r.passed ? 1 : 0);
  }
  return out;
}

}  // namespace gmfs
