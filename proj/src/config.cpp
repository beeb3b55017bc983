#include "gmfs/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gmfs/errors.hpp"
#include "gmfs/rng.hpp"

namespace gmfs {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name", "n", "master_seed"}},
      {"env",
       {"name", "file", "state_values", "action_costs", "congestion_sensitivity", "min_utility",
        "base_success", "min_work_success", "congestion_slope", "noise", "noise_half_width"}},
      {"graphon", {"kind", "radius", "beta", "boundaries", "blocks", "latent", "points"}},
      {"train",
       {"gamma", "iterations", "samples", "epsilon", "kappa_list", "xi", "mode",
        "surrogate_aggregate", "neighbor_action_rule", "exact", "exact_cap",
        "resample_each_sweep"}},
      {"execute",
       {"horizon", "seeds", "init", "init_state", "init_states", "init_pmf", "reward_source",
        "baseline"}},
      {"diagnose",
       {"pairs", "small_kappa", "concentration_kappas", "delta", "trials", "ht_n", "ht_kappa",
        "ht_replications", "lipschitz_n", "lipschitz_kappa", "lipschitz_sweeps",
        "offpolicy_steps", "offpolicy_alpha"}},
      {"output", {"dir", "timing", "save_qtables"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Field accessor that turns every failure into a ConfigError naming the field.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }
  std::string raw(const std::string& key) const {
    return unquote(tree_->find(key)->second.data());
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + why);
  }

  double number(const std::string& key, const std::string& text) const {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || text.empty()) fail(key, "expected a number, got '" + text + "'");
    return v;
  }
  std::uint64_t integer(const std::string& key, const std::string& text) const {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || text.empty()) {
      fail(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
  }

  void get(const std::string& key, double& out) const {
    if (has(key)) out = number(key, raw(key));
  }
  template <typename Int>
  void get_int(const std::string& key, Int& out) const {
    if (!has(key)) return;
    const std::uint64_t v = integer(key, raw(key));
    if (v > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) fail(key, "value too large");
    out = static_cast<Int>(v);
  }
  void get(const std::string& key, std::string& out) const {
    if (has(key)) out = raw(key);
  }
  void get(const std::string& key, bool& out) const {
    if (!has(key)) return;
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "yes") {
      out = true;
    } else if (v == "false" || v == "0" || v == "no") {
      out = false;
    } else {
      fail(key, "expected true or false, got '" + v + "'");
    }
  }
  void get_list(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    out.clear();
    const std::string text = raw(key);
    if (text.empty()) return;
    for (const auto& item : split(text, ',')) out.push_back(number(key, item));
  }
  template <typename Int>
  void get_int_list(const std::string& key, std::vector<Int>& out) const {
    if (!has(key)) return;
    out.clear();
    const std::string text = raw(key);
    if (text.empty()) return;
    for (const auto& item : split(text, ',')) out.push_back(static_cast<Int>(integer(key, item)));
  }
  template <typename Enum>
  void get_enum(const std::string& key, Enum& out,
                const std::vector<std::pair<std::string, Enum>>& choices) const {
    if (!has(key)) return;
    const std::string v = raw(key);
    std::string names;
    for (const auto& [name, value] : choices) {
      if (name == v) {
        out = value;
        return;
      }
      names += (names.empty() ? "" : " | ") + name;
    }
    fail(key, "expected one of " + names + ", got '" + v + "'");
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
};

std::string fmt_double(double v) { return fmt::format("{}", v); }

template <typename T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
  return fmt::format("{}", fmt::join(v, sep));
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  bool contiguous = !seeds.empty();
  for (std::size_t k = 1; k < seeds.size(); ++k) contiguous &= seeds[k] == seeds[k - 1] + 1;
  if (contiguous && seeds.size() > 1) return fmt::format("{}..{}", seeds.front(), seeds.back() + 1);
  return join(seeds);
}

const std::vector<std::pair<std::string, Mode>> kModes{{"marginal", Mode::kMarginal},
                                                       {"joint", Mode::kJoint}};
const std::vector<std::pair<std::string, SurrogateAggregate>> kAggregates{
    {"leave_one_out", SurrogateAggregate::kLeaveOneOut}, {"shared", SurrogateAggregate::kShared}};
const std::vector<std::pair<std::string, NoiseFamily>> kNoise{
    {"degenerate", NoiseFamily::kDegenerate}, {"uniform", NoiseFamily::kUniform}};
const std::vector<std::pair<std::string, AggregateSource>> kSources{
    {"exact", AggregateSource::kExact}, {"sampled", AggregateSource::kSampled}};

template <typename Enum>
std::string enum_name(Enum v, const std::vector<std::pair<std::string, Enum>>& choices) {
  for (const auto& [name, value] : choices) {
    if (value == v) return name;
  }
  return "?";
}

void validate(ExperimentConfig& c) {
  auto fail = [](const std::string& section, const std::string& key, const std::string& why) {
    throw ConfigError("[" + section + "] " + key + ": " + why);
  };
  if (c.n < 2) fail("experiment", "n", "need at least 2 agents");

  const auto& e = c.env;
  if (e.name != "warehouse" && e.name != "toy2" && e.name != "tabular") {
    fail("env", "name", "expected warehouse | toy2 | tabular, got '" + e.name + "'");
  }
  if (e.name == "tabular" && e.file.empty()) fail("env", "file", "required for tabular envs");
  if (!(e.noise_half_width >= 0.0)) fail("env", "noise_half_width", "must be non-negative");
  try {
    WarehouseEnv check(e.warehouse);
  } catch (const Error& err) {
    fail("env", "warehouse parameters", err.what());
  }

  const auto& g = c.graphon;
  if (g.latent != "grid" && g.latent != "sequential" && g.latent != "explicit") {
    fail("graphon", "latent", "expected grid | sequential | explicit, got '" + g.latent + "'");
  }
  if (g.latent == "explicit" && g.points.size() != c.n) {
    fail("graphon", "points", "explicit latent needs exactly n points");
  }
  try {
    make_graphon(g);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    fail("graphon", g.kind, err.what());
  }

  auto& t = c.train;
  if (!(t.gamma > 0.0 && t.gamma < 1.0)) fail("train", "gamma", "must lie in (0, 1), got " + fmt_double(t.gamma));
  if (t.samples == 0) fail("train", "samples", "must be at least 1");
  if (!(t.epsilon >= 0.0)) fail("train", "epsilon", "must be non-negative");
  if (t.xi == 0) fail("train", "xi", "must be at least 1");
  if (t.kappa_list.empty()) fail("train", "kappa_list", "must not be empty");
  std::set<std::uint32_t> seen;
  for (std::uint32_t k : t.kappa_list) {
    if (k < 1 || k > c.n - 1) {
      fail("train", "kappa_list",
           "kappa=" + std::to_string(k) + " outside [1, n-1] = [1, " + std::to_string(c.n - 1) + "]");
    }
    if (!seen.insert(k).second) fail("train", "kappa_list", "duplicate kappa=" + std::to_string(k));
  }

  const auto& x = c.execute;
  if (x.seeds.empty()) fail("execute", "seeds", "must not be empty");
  if (x.init.kind == InitialStates::Kind::kPerAgent && x.init.per_agent.size() != c.n) {
    fail("execute", "init_states", "needs exactly n entries");
  }

  const auto& d = c.diagnose;
  if (!(d.delta > 0.0 && d.delta < 1.0)) fail("diagnose", "delta", "must lie in (0, 1)");
  if (!(d.offpolicy_alpha > 0.0 && d.offpolicy_alpha <= 1.0)) {
    fail("diagnose", "offpolicy_alpha", "must lie in (0, 1]");
  }
  if (d.small_kappa == 0 || d.ht_kappa == 0 || d.lipschitz_kappa == 0) {
    fail("diagnose", "kappa", "diagnostic kappas must be at least 1");
  }
  if (d.ht_n < 2) fail("diagnose", "ht_n", "need at least 2 agents");
  if (d.lipschitz_n < 2 || d.lipschitz_kappa > d.lipschitz_n - 1) {
    fail("diagnose", "lipschitz_kappa", "must lie in [1, lipschitz_n - 1]");
  }
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text_in) {
  const std::string text = unquote(text_in);
  std::vector<std::uint64_t> out;
  auto to_u64 = [&](const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      throw ConfigError("bad seed list '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = to_u64(trim(text.substr(0, dots)));
    const std::uint64_t hi = to_u64(trim(text.substr(dots + 2)));
    if (hi <= lo) throw ConfigError("empty seed range '" + text + "'");
    if (hi - lo > 10'000'000) throw ConfigError("seed range too large");
    for (std::uint64_t s = lo; s < hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& item : split(text, ',')) out.push_back(to_u64(item));
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    throw ConfigError("config line " + std::to_string(err.line()) + ": " + err.message());
  }
  const auto& allowed = allowed_keys();
  for (const auto& [name, section] : tree) {
    auto it = allowed.find(name);
    if (it == allowed.end()) {
      if (section.empty()) throw ConfigError("key '" + name + "' must live inside a section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : section) {
      if (!it->second.count(key)) throw ConfigError("[" + name + "] unknown key '" + key + "'");
      if (!value.empty()) throw ConfigError("[" + name + "] " + key + ": nested value");
    }
  }
  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig c;
  c.execute.seeds = parse_seed_list("0..30");

  const Section ex = section("experiment");
  ex.get("name", c.name);
  ex.get_int("n", c.n);
  ex.get_int("master_seed", c.master_seed);

  const Section env = section("env");
  env.get("name", c.env.name);
  env.get("file", c.env.file);
  auto& wp = c.env.warehouse;
  for (auto [key, arr] : {std::pair{"state_values", &wp.state_values},
                          std::pair{"action_costs", &wp.action_costs}}) {
    if (!env.has(key)) continue;
    std::vector<double> v;
    env.get_list(key, v);
    if (v.size() != 3) env.fail(key, "expected 3 comma-separated numbers");
    std::copy(v.begin(), v.end(), arr->begin());
  }
  env.get("congestion_sensitivity", wp.congestion_sensitivity);
  env.get("min_utility", wp.min_utility);
  env.get("base_success", wp.base_success);
  env.get("min_work_success", wp.min_work_success);
  env.get("congestion_slope", wp.congestion_slope);
  env.get_enum("noise", c.env.noise, kNoise);
  env.get("noise_half_width", c.env.noise_half_width);

  const Section gr = section("graphon");
  gr.get("kind", c.graphon.kind);
  gr.get("radius", c.graphon.radius);
  gr.get("beta", c.graphon.beta);
  gr.get_list("boundaries", c.graphon.boundaries);
  if (gr.has("blocks")) {
    c.graphon.block_values.clear();
    for (const auto& row : split(gr.raw("blocks"), ';')) {
      std::vector<double> values;
      for (const auto& item : split(row, ',')) values.push_back(gr.number("blocks", item));
      c.graphon.block_values.push_back(std::move(values));
    }
  }
  gr.get("latent", c.graphon.latent);
  if (gr.has("points")) {
    for (const auto& pt_text : split(gr.raw("points"), ';')) {
      const auto xy = split(pt_text, ',');
      if (xy.size() == 1) {
        c.graphon.points.push_back(LatentPoint::line(gr.number("points", xy[0])));
      } else if (xy.size() == 2) {
        c.graphon.points.push_back(
            LatentPoint::plane(gr.number("points", xy[0]), gr.number("points", xy[1])));
      } else {
        gr.fail("points", "each point needs 1 or 2 coordinates");
      }
    }
  }

  const Section tr = section("train");
  tr.get("gamma", c.train.gamma);
  tr.get_int("iterations", c.train.iterations);
  tr.get_int("samples", c.train.samples);
  tr.get("epsilon", c.train.epsilon);
  tr.get_int_list("kappa_list", c.train.kappa_list);
  tr.get_int("xi", c.train.xi);
  tr.get_enum("mode", c.train.mode, kModes);
  tr.get_enum("surrogate_aggregate", c.train.surrogate_aggregate, kAggregates);
  if (tr.has("neighbor_action_rule")) {
    const std::string v = tr.raw("neighbor_action_rule");
    if (v == "greedy") {
      c.train.neighbor_action_rule = NeighborActionRule::kGreedy;
    } else if (v == "uniform") {
      c.train.neighbor_action_rule = NeighborActionRule::kUniform;
    } else if (v != "auto") {
      tr.fail("neighbor_action_rule", "expected auto | greedy | uniform, got '" + v + "'");
    }
  }
  tr.get("exact", c.train.exact);
  tr.get_int("exact_cap", c.train.exact_cap);
  tr.get("resample_each_sweep", c.train.resample_each_sweep);

  const Section xs = section("execute");
  xs.get_int("horizon", c.execute.horizon);
  if (xs.has("seeds")) c.execute.seeds = parse_seed_list(xs.raw("seeds"));
  std::string init = "fixed";
  xs.get("init", init);
  if (init == "fixed") {
    c.execute.init.kind = InitialStates::Kind::kFixed;
    xs.get_int("init_state", c.execute.init.state);
  } else if (init == "per_agent") {
    c.execute.init.kind = InitialStates::Kind::kPerAgent;
    xs.get_int_list("init_states", c.execute.init.per_agent);
  } else if (init == "categorical") {
    c.execute.init.kind = InitialStates::Kind::kCategorical;
    xs.get_list("init_pmf", c.execute.init.pmf);
  } else {
    xs.fail("init", "expected fixed | per_agent | categorical, got '" + init + "'");
  }
  xs.get_enum("reward_source", c.execute.reward_source, kSources);
  if (xs.has("baseline")) {
    const std::string v = xs.raw("baseline");
    if (v != "none" && v != "exact") xs.fail("baseline", "expected none | exact, got '" + v + "'");
    c.execute.baseline_exact = v == "exact";
  }

  const Section dg = section("diagnose");
  auto& d = c.diagnose;
  dg.get_int("pairs", d.pairs);
  dg.get_int("small_kappa", d.small_kappa);
  dg.get_int_list("concentration_kappas", d.concentration_kappas);
  dg.get("delta", d.delta);
  dg.get_int("trials", d.trials);
  dg.get_int("ht_n", d.ht_n);
  dg.get_int("ht_kappa", d.ht_kappa);
  dg.get_int("ht_replications", d.ht_replications);
  dg.get_int("lipschitz_n", d.lipschitz_n);
  dg.get_int("lipschitz_kappa", d.lipschitz_kappa);
  dg.get_int("lipschitz_sweeps", d.lipschitz_sweeps);
  dg.get_int("offpolicy_steps", d.offpolicy_steps);
  dg.get("offpolicy_alpha", d.offpolicy_alpha);

  const Section out = section("output");
  out.get("dir", c.output.dir);
  out.get("timing", c.output.timing);
  out.get("save_qtables", c.output.save_qtables);

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string s;
  auto line = [&](const std::string& key, const std::string& value) {
    s += key + " = " + value + "\n";
  };
  const auto& wp = c.env.warehouse;
  const auto& g = c.graphon;
  const auto& t = c.train;
  const auto& x = c.execute;
  const auto& d = c.diagnose;

  s += "[experiment]\n";
  line("name", c.name);
  line("n", std::to_string(c.n));
  line("master_seed", std::to_string(c.master_seed));

  s += "\n[env]\n";
  line("name", c.env.name);
  line("file", c.env.file);
  line("state_values", join(std::vector<double>(wp.state_values.begin(), wp.state_values.end())));
  line("action_costs", join(std::vector<double>(wp.action_costs.begin(), wp.action_costs.end())));
  line("congestion_sensitivity", fmt_double(wp.congestion_sensitivity));
  line("min_utility", fmt_double(wp.min_utility));
  line("base_success", fmt_double(wp.base_success));
  line("min_work_success", fmt_double(wp.min_work_success));
  line("congestion_slope", fmt_double(wp.congestion_slope));
  line("noise", enum_name(c.env.noise, kNoise));
  line("noise_half_width", fmt_double(c.env.noise_half_width));

  s += "\n[graphon]\n";
  line("kind", g.kind);
  line("radius", fmt_double(g.radius));
  line("beta", fmt_double(g.beta));
  line("boundaries", join(g.boundaries));
  std::vector<std::string> rows;
  for (const auto& r : g.block_values) rows.push_back(join(r));
  line("blocks", join(rows, ";"));
  line("latent", g.latent);
  std::vector<std::string> pts;
  for (const auto& p : g.points) {
    pts.push_back(p.dim == 1 ? fmt_double(p.x[0]) : fmt_double(p.x[0]) + "," + fmt_double(p.x[1]));
  }
  line("points", join(pts, ";"));

  s += "\n[train]\n";
  line("gamma", fmt_double(t.gamma));
  line("iterations", std::to_string(t.iterations));
  line("samples", std::to_string(t.samples));
  line("epsilon", fmt_double(t.epsilon));
  line("kappa_list", join(t.kappa_list));
  line("xi", std::to_string(t.xi));
  line("mode", enum_name(t.mode, kModes));
  line("surrogate_aggregate", enum_name(t.surrogate_aggregate, kAggregates));
  line("neighbor_action_rule",
       !t.neighbor_action_rule ? "auto"
       : *t.neighbor_action_rule == NeighborActionRule::kGreedy ? "greedy"
                                                                : "uniform");
  line("exact", t.exact ? "true" : "false");
  line("exact_cap", std::to_string(t.exact_cap));
  line("resample_each_sweep", t.resample_each_sweep ? "true" : "false");

  s += "\n[execute]\n";
  line("horizon", std::to_string(x.horizon));
  line("seeds", seeds_text(x.seeds));
  switch (x.init.kind) {
    case InitialStates::Kind::kFixed:
      line("init", "fixed");
      line("init_state", std::to_string(x.init.state));
      break;
    case InitialStates::Kind::kPerAgent:
      line("init", "per_agent");
      line("init_states", join(x.init.per_agent));
      break;
    case InitialStates::Kind::kCategorical:
      line("init", "categorical");
      line("init_pmf", join(x.init.pmf));
      break;
  }
  line("reward_source", enum_name(x.reward_source, kSources));
  line("baseline", x.baseline_exact ? "exact" : "none");

  s += "\n[diagnose]\n";
  line("pairs", std::to_string(d.pairs));
  line("small_kappa", std::to_string(d.small_kappa));
  line("concentration_kappas", join(d.concentration_kappas));
  line("delta", fmt_double(d.delta));
  line("trials", std::to_string(d.trials));
  line("ht_n", std::to_string(d.ht_n));
  line("ht_kappa", std::to_string(d.ht_kappa));
  line("ht_replications", std::to_string(d.ht_replications));
  line("lipschitz_n", std::to_string(d.lipschitz_n));
  line("lipschitz_kappa", std::to_string(d.lipschitz_kappa));
  line("lipschitz_sweeps", std::to_string(d.lipschitz_sweeps));
  line("offpolicy_steps", std::to_string(d.offpolicy_steps));
  line("offpolicy_alpha", fmt_double(d.offpolicy_alpha));

  s += "\n[output]\n";
  line("dir", c.output.dir);
  line("timing", c.output.timing ? "true" : "false");
  line("save_qtables", c.output.save_qtables ? "true" : "false");
  return s;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::shared_ptr<const Environment> make_environment(const EnvConfig& env) {
  if (env.name == "warehouse") return std::make_shared<WarehouseEnv>(env.warehouse);
  if (env.name == "toy2") return std::make_shared<TabularEnv>(TabularEnv::toy2());
  if (env.name == "tabular") return std::make_shared<TabularEnv>(TabularEnv::load(env.file));
  throw ConfigError("[env] name: unknown environment '" + env.name + "'");
}

Graphon make_graphon(const GraphonConfig& g) {
  int dim = 1;
  if (g.latent == "grid") dim = 2;
  if (g.latent == "explicit" && !g.points.empty()) dim = g.points.front().dim;
  if (g.kind == "radial") return Graphon(RadialGraphon{g.radius}, dim);
  if (g.kind == "uniform") return Graphon(UniformGraphon{}, dim);
  if (dim != 1) {
    throw ConfigError("[graphon] latent: kind '" + g.kind + "' needs a 1-D latent (sequential)");
  }
  if (g.kind == "exp_decay") return Graphon(ExpDecayGraphon{g.beta}, 1);
  if (g.kind == "block") return Graphon(BlockGraphon{g.boundaries, g.block_values}, 1);
  throw ConfigError("[graphon] kind: expected radial | exp_decay | block | uniform, got '" +
                    g.kind + "'");
}

LatentAssignment make_assignment(const GraphonConfig& g, std::size_t n) {
  if (g.latent == "grid") return LatentAssignment::grid(n);
  if (g.latent == "sequential") return LatentAssignment::sequential(n);
  return LatentAssignment::explicit_points(g.points);
}

WeightMatrix make_weights(const ExperimentConfig& config) {
  return build_weights(make_graphon(config.graphon), make_assignment(config.graphon, config.n));
}

SurrogateSettings surrogate_settings(const ExperimentConfig& config, std::uint32_t kappa) {
  SurrogateSettings s;
  s.mode = config.train.mode;
  s.kappa = kappa;
  s.gamma = config.train.gamma;
  s.aggregate = config.train.surrogate_aggregate;
  s.neighbor_actions = config.train.neighbor_action_rule;
  s.exact_cap = config.train.exact_cap;
  return s;
}

ValueIterationOptions train_options(const ExperimentConfig& config, std::uint32_t kappa) {
  ValueIterationOptions o;
  o.max_sweeps = config.train.iterations;
  o.samples = config.train.samples;
  o.epsilon = config.train.epsilon;
  o.seed = stream_key({config.master_seed, static_cast<std::uint64_t>(StreamTag::kTrain), kappa});
  o.exact = config.train.exact;
  o.resample_each_sweep = config.train.resample_each_sweep;
  return o;
}

ExecutionSettings execution_settings(const ExperimentConfig& config, std::uint32_t kappa) {
  ExecutionSettings e;
  e.kappa = kappa;
  e.horizon = config.execute.horizon;
  e.gamma = config.train.gamma;
  e.init = config.execute.init;
  e.reward_source = config.execute.reward_source;
  return e;
}

}  // namespace gmfs
