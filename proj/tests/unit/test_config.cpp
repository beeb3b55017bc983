#include <doctest.h>

#include <string>

#include "gmfs/config.hpp"
#include "gmfs/errors.hpp"

using namespace gmfs;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults reproduce the reference training configuration") {
  const auto c = parse_config("[train]\n");
  CHECK(c.train.gamma == 0.95);
  CHECK(c.train.iterations == 250);
  CHECK(c.train.samples == 50);
  CHECK(c.train.epsilon == 1e-4);
  CHECK(c.train.kappa_list == std::vector<std::uint32_t>{1, 3, 6, 9, 12, 15, 18, 21, 24});
  CHECK(c.train.mode == Mode::kMarginal);
  CHECK(c.n == 25);
  CHECK(c.execute.horizon == 100);
  CHECK(c.execute.seeds.size() == 30);
  CHECK(c.execute.seeds.front() == 0);
  CHECK(c.execute.seeds.back() == 29);
  CHECK(c.env.name == "warehouse");
  CHECK(c.graphon.kind == "radial");
  CHECK(c.graphon.radius == 0.3);
}

TEST_CASE("values are parsed") {
  const auto c = parse_config(R"(
# comment
[experiment]
name = "small"
n = 10
master_seed = 7

[env]
name = toy2

[graphon]
kind = exp_decay
beta = 2.5
latent = sequential

[train]
; full-line comment
gamma = 0.9
kappa_list = 1, 2, 9
mode = joint
surrogate_aggregate = shared
neighbor_action_rule = uniform

[execute]
seeds = 3,5,8
init = categorical
init_pmf = 0.25, 0.75
baseline = exact
)");
  CHECK(c.name == "small");
  CHECK(c.n == 10);
  CHECK(c.master_seed == 7);
  CHECK(c.env.name == "toy2");
  CHECK(c.graphon.kind == "exp_decay");
  CHECK(c.graphon.beta == 2.5);
  CHECK(c.train.gamma == 0.9);
  CHECK(c.train.kappa_list == std::vector<std::uint32_t>{1, 2, 9});
  CHECK(c.train.mode == Mode::kJoint);
  CHECK(c.train.surrogate_aggregate == SurrogateAggregate::kShared);
  CHECK(c.train.neighbor_action_rule == NeighborActionRule::kUniform);
  CHECK(c.execute.seeds == std::vector<std::uint64_t>{3, 5, 8});
  CHECK(c.execute.init.kind == InitialStates::Kind::kCategorical);
  CHECK(c.execute.baseline_exact);
}

TEST_CASE("constraint violations name the field") {
  CHECK(error_of("[train]\nkappa_list = 1, 25\n").find("kappa_list") != std::string::npos);
  CHECK(error_of("[train]\nkappa_list = 0\n").find("kappa_list") != std::string::npos);
  CHECK(error_of("[train]\nkappa_list = 3, 3\n").find("duplicate") != std::string::npos);
  CHECK(error_of("[train]\ngamma = 1.0\n").find("gamma") != std::string::npos);
  CHECK(error_of("[train]\nsamples = abc\n").find("samples") != std::string::npos);
  CHECK(error_of("[train]\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(error_of("[nonsense]\nx = 1\n").find("nonsense") != std::string::npos);
  CHECK(error_of("[train]\nmode = sideways\n").find("mode") != std::string::npos);
  CHECK(error_of("[train]\ngamma = 0.9\ngamma = 0.8\n") != "");
  CHECK(error_of("[execute]\nbaseline = maybe\n").find("baseline") != std::string::npos);
  CHECK(error_of("[experiment]\nn = 1\n") != "");
  CHECK(error_of("") == "");
}

TEST_CASE("serialization is canonical and round-trips") {
  const auto c = parse_config("[train]\nkappa_list = 24, 1\ngamma = 0.9\n[execute]\nseeds = 0..5\n");
  const std::string text = serialize_config(c);
  const auto again = parse_config(text);
  CHECK(serialize_config(again) == text);
  CHECK(config_hash(again) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  CHECK(config_hash(parse_config("")) != config_hash(c));
  // Equivalent spellings normalize to the same canonical text.
  const auto d = parse_config("[train]\ngamma=0.90\nkappa_list=24,1\n[execute]\nseeds=0,1,2,3,4\n");
  CHECK(serialize_config(d) == text);
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(parse_seed_list("4, 9,1") == std::vector<std::uint64_t>{4, 9, 1});
  CHECK(parse_seed_list("0..30").size() == 30);
  CHECK_THROWS_AS(parse_seed_list("5..5"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("a,b"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("-1"), ConfigError);
}

TEST_CASE("factories build what the config describes") {
  const auto c = parse_config("");
  const auto env = make_environment(c.env);
  CHECK(env->name() == "warehouse");
  const auto w = make_weights(c);
  CHECK(w.n() == 25);
  const auto s = surrogate_settings(c, 6);
  CHECK(s.kappa == 6);
  CHECK(s.gamma == 0.95);
  CHECK(s.mode == Mode::kMarginal);
  const auto o = train_options(c, 6);
  CHECK(o.max_sweeps == 250);
  CHECK(o.samples == 50);
  const auto x = execution_settings(c, 6);
  CHECK(x.kappa == 6);
  CHECK(x.horizon == 100);
  CHECK(make_environment(parse_config("[env]\nname = toy2\n").env)->n_states() == 2);
  CHECK_THROWS(make_environment(parse_config("[env]\nname = tabular\nfile = /nonexistent.env\n").env));
}

TEST_CASE("train seeds differ across kappa and master seed") {
  const auto c = parse_config("");
  const auto d = parse_config("[experiment]\nmaster_seed = 1\n");
  CHECK(train_options(c, 3).seed != train_options(c, 6).seed);
  CHECK(train_options(c, 3).seed != train_options(d, 3).seed);
  CHECK(train_options(c, 3).seed == train_options(parse_config(""), 3).seed);
}
