#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "gmfs/bellman.hpp"
#include "gmfs/config.hpp"
#include "gmfs/env.hpp"
#include "gmfs/errors.hpp"
#include "gmfs/execution.hpp"
#include "gmfs/harness.hpp"
#include "gmfs/histogram.hpp"
#include "gmfs/qtable.hpp"

namespace py = pybind11;
using namespace gmfs;

namespace {

struct TrainedTable {
  std::shared_ptr<const QTable> q;
  std::uint32_t sweeps = 0;
  bool converged = false;
  std::vector<double> residuals;
};

TrainedTable train(const ExperimentConfig& config, std::uint32_t kappa, bool exact) {
  if (kappa == 0 || kappa > config.n - 1) throw ConfigError("kappa outside [1, n-1]");
  const auto env = make_environment(config.env);
  const SurrogateModel model(env, surrogate_settings(config, kappa));
  auto options = train_options(config, kappa);
  options.exact = options.exact || exact;
  py::gil_scoped_release release;
  ValueIterationResult r =
      config.train.xi > 1 || config.env.noise != NoiseFamily::kDegenerate
          ? value_iteration_stochastic(
                model, StochasticRewardEnv(env, config.env.noise, config.env.noise_half_width),
                config.train.xi, options)
          : value_iteration(model, options);
  return {std::make_shared<const QTable>(std::move(r.q)), r.sweeps, r.converged,
          std::move(r.residuals)};
}

py::dict evaluate(const ExperimentConfig& config, const TrainedTable& table,
                  std::optional<std::vector<std::uint64_t>> seeds, bool baseline_exact) {
  const auto env = make_environment(config.env);
  const auto weights = make_weights(config);
  const Policy policy(table.q);
  ExecutionSettings exec = execution_settings(config, table.q->kappa());
  if (baseline_exact) exec.policy_input = AggregateSource::kExact;
  std::vector<std::uint64_t> mixed;
  for (auto s : seeds.value_or(config.execute.seeds)) mixed.push_back(episode_seed(config, s));
  PolicySummary summary;
  {
    py::gil_scoped_release release;
    summary = evaluate_policy(*env, weights, policy, exec, mixed);
  }
  py::dict out;
  out["mean"] = summary.mean;
  out["stderr"] = summary.std_error;
  out["returns"] = summary.returns;
  return out;
}

py::list sweep(const ExperimentConfig& config) {
  SweepReport report;
  {
    py::gil_scoped_release release;
    report = run_sweep(config);
  }
  py::list rows;
  for (const auto& r : report.rows) {
    py::dict d;
    d["kappa"] = r.kappa;
    d["table_size"] = r.table_size;
    d["train_iterations"] = r.train_iterations;
    d["train_residual"] = r.train_residual;
    d["converged"] = r.converged;
    d["mean_return"] = r.mean_return;
    d["stderr_return"] = r.stderr_return;
    d["baseline_mean"] = r.baseline_mean ? py::cast(*r.baseline_mean) : py::none();
    d["status"] = r.status;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_gmfs, m) {
  m.doc() = "Graphon mean-field subsampling: tabular training and decentralized execution";
  m.attr("__version__") = code_version();

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("histogram_count", &histogram_count, py::arg("alphabet_size"), py::arg("kappa"));
  m.def(
      "rank",
      [](const std::vector<std::uint32_t>& counts) {
        std::uint32_t kappa = 0;
        for (auto c : counts) kappa += c;
        return HistogramIndex(counts.size(), kappa).rank(counts);
      },
      py::arg("counts"), "Colex rank of a count vector among histograms with the same total.");
  m.def(
      "unrank",
      [](std::size_t alphabet_size, std::uint32_t kappa, std::uint64_t index) {
        return HistogramIndex(alphabet_size, kappa).unrank(index);
      },
      py::arg("alphabet_size"), py::arg("kappa"), py::arg("index"));
  m.def("sample_budget", &sample_budget, py::arg("kappa"), py::arg("gamma"),
        py::arg("reward_bound"), py::arg("n_states"), py::arg("n_actions"));

  py::class_<WarehouseEnv, std::shared_ptr<WarehouseEnv>>(m, "WarehouseEnv")
      .def(py::init<>())
      .def_property_readonly("reward_bound", &WarehouseEnv::reward_bound)
      .def("step_distribution",
           [](const WarehouseEnv& env, std::size_t s, std::size_t a, const std::vector<double>& g) {
             return step_distribution(env, s, a, g);
           })
      .def("reward", [](const WarehouseEnv& env, std::size_t s, std::size_t a,
                        const std::vector<double>& g) { return local_reward(env, s, a, g); });

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init([] { return parse_config(""); }))
      .def_static("from_text", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("serialize", &serialize_config)
      .def_property_readonly("hash", &config_hash)
      .def_property_readonly("n", [](const ExperimentConfig& c) { return c.n; })
      .def_property_readonly("kappa_list",
                             [](const ExperimentConfig& c) { return c.train.kappa_list; })
      .def_property_readonly("gamma", [](const ExperimentConfig& c) { return c.train.gamma; })
      .def_property_readonly("seeds", [](const ExperimentConfig& c) { return c.execute.seeds; });

  py::class_<TrainedTable>(m, "QTable")
      .def_property_readonly("kappa", [](const TrainedTable& t) { return t.q->kappa(); })
      .def_property_readonly("mode", [](const TrainedTable& t) { return std::string(to_string(t.q->mode())); })
      .def_property_readonly("size", [](const TrainedTable& t) { return t.q->size(); })
      .def_property_readonly("n_histograms", [](const TrainedTable& t) { return t.q->n_histograms(); })
      .def_property_readonly("sup_norm", [](const TrainedTable& t) { return t.q->sup_norm(); })
      .def_property_readonly("residual", [](const TrainedTable& t) { return t.q->meta().residual; })
      .def_readonly("sweeps", &TrainedTable::sweeps)
      .def_readonly("converged", &TrainedTable::converged)
      .def_readonly("residuals", &TrainedTable::residuals)
      .def("values", [](const TrainedTable& t) {
        return std::vector<double>(t.q->values().begin(), t.q->values().end());
      })
      .def("__call__", [](const TrainedTable& t, std::size_t s, std::size_t a, std::uint64_t h) {
        if (s >= t.q->n_states() || a >= t.q->n_actions() || h >= t.q->n_histograms()) {
          throw py::index_error("Q-table index out of range");
        }
        return (*t.q)(s, a, h);
      })
      .def("save", [](const TrainedTable& t, const std::string& path) { save_qtable(*t.q, path); });

  m.def(
      "load_qtable",
      [](const std::string& path) {
        QTable q = load_qtable(path);
        TrainedTable t;
        t.sweeps = static_cast<std::uint32_t>(q.meta().iterations);
        t.q = std::make_shared<const QTable>(std::move(q));
        return t;
      },
      py::arg("path"));
  m.def("train", &train, py::arg("config"), py::arg("kappa"), py::arg("exact") = false,
        "Run value iteration for one kappa.");
  m.def("evaluate", &evaluate, py::arg("config"), py::arg("qtable"),
        py::arg("seeds") = py::none(), py::arg("baseline_exact") = false,
        "Run episodes with the greedy policy of a trained table.");
  m.def("sweep", &sweep, py::arg("config"), "Train and evaluate every kappa in the config.");
}
