#include <doctest.h>

#include <cmath>

#include "gmfs/errors.hpp"
#include "gmfs/graphon.hpp"

using namespace gmfs;

TEST_CASE("radial graphon evaluation") {
  const Graphon w = Graphon::radial(0.3);
  CHECK(w.evaluate(LatentPoint::plane(0.5, 0.5), LatentPoint::plane(0.5, 0.7)) == 1.0);
  CHECK(w.evaluate(LatentPoint::plane(0.5, 0.5), LatentPoint::plane(0.5, 0.81)) == 0.0);
  CHECK(w.evaluate(LatentPoint::plane(0.2, 0.9), LatentPoint::plane(0.2, 0.9)) == 1.0);
  CHECK_THROWS_AS(w.evaluate(LatentPoint::line(0.5), LatentPoint::line(0.6)), DimensionError);
}

TEST_CASE("exp-decay graphon evaluation") {
  const Graphon w = Graphon::exp_decay(2.0);
  CHECK(w.evaluate(LatentPoint::line(0.1), LatentPoint::line(0.6)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(w.evaluate(LatentPoint::line(0.3), LatentPoint::line(0.3)) == 1.0);
}

TEST_CASE("block graphon uses half-open intervals") {
  const Graphon w = Graphon::block({0.5}, {{0.9, 0.1}, {0.1, 0.7}});
  CHECK(w.evaluate(LatentPoint::line(0.2), LatentPoint::line(0.3)) == 0.9);
  CHECK(w.evaluate(LatentPoint::line(0.5), LatentPoint::line(0.5)) == 0.7);
  CHECK(w.evaluate(LatentPoint::line(0.49), LatentPoint::line(0.5)) == 0.1);
  CHECK(w.evaluate(LatentPoint::line(1.0), LatentPoint::line(1.0)) == 0.7);
  CHECK_THROWS(Graphon::block({0.5}, {{0.9, 0.2}, {0.1, 0.7}}));  // asymmetric
  CHECK_THROWS(Graphon::block({0.6, 0.4}, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
}

TEST_CASE("graphon parameter validation") {
  CHECK_THROWS(Graphon::radial(0.0));
  CHECK_THROWS(Graphon::radial(1.5));
  CHECK_THROWS(Graphon::exp_decay(-1.0));
  CHECK_THROWS(Graphon(ExpDecayGraphon{1.0}, 2));
}

TEST_CASE("graphons are symmetric and bounded") {
  const std::vector<Graphon> kinds{Graphon::exp_decay(3.0), Graphon::uniform(),
                                   Graphon::block({0.3, 0.8}, {{1, 0.5, 0}, {0.5, 0.2, 0.1}, {0, 0.1, 1}})};
  for (const auto& w : kinds) {
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        const auto x = LatentPoint::line(i / 20.0);
        const auto y = LatentPoint::line(j / 20.0);
        const double v = w.evaluate(x, y);
        CHECK(v == w.evaluate(y, x));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("latent assignments") {
  const auto seq = LatentAssignment::sequential(4);
  REQUIRE(seq.n() == 4);
  CHECK(seq.coords()[0].x[0] == 0.25);
  CHECK(seq.coords()[3].x[0] == 1.0);
  const auto grid = LatentAssignment::grid(25);
  REQUIRE(grid.n() == 25);
  CHECK(grid.dim() == 2);
  CHECK(grid.coords()[1].x[0] - grid.coords()[0].x[0] == doctest::Approx(0.25));
  CHECK(grid.coords()[24].x[0] == 1.0);
  CHECK(grid.coords()[24].x[1] == 1.0);
  CHECK_THROWS(LatentAssignment::explicit_points({LatentPoint::line(1.5)}));
}

TEST_CASE("uniform graphon weights") {
  const auto w = build_weights(Graphon::uniform(), LatentAssignment::sequential(4));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(w.normalized(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 3.0));
    }
  }
}

TEST_CASE("radial weights on the 5x5 grid") {
  const auto assignment = LatentAssignment::grid(25);
  const auto w = build_weights(Graphon::radial(0.3), assignment);
  auto nonzero = [&](std::size_t i) {
    int c = 0;
    for (std::size_t j = 0; j < 25; ++j) c += w.raw(i, j) > 0.0;
    return c;
  };
  // Oracle: count lattice neighbors within distance 0.3 directly.
  auto expected = [](int r, int c) {
    int count = 0;
    for (int r2 = 0; r2 < 5; ++r2) {
      for (int c2 = 0; c2 < 5; ++c2) {
        if (r2 == r && c2 == c) continue;
        const double d = 0.25 * std::hypot(r2 - r, c2 - c);
        count += d <= 0.3;
      }
    }
    return count;
  };
  CHECK(nonzero(0) == expected(0, 0));
  CHECK(nonzero(12) == expected(2, 2));
  CHECK(nonzero(0) < nonzero(12));
  for (std::size_t i = 0; i < 25; ++i) {
    double row = 0.0;
    CHECK(w.raw(i, i) == 0.0);
    CHECK(w.normalized(i, i) == 0.0);
    for (std::size_t j = 0; j < 25; ++j) {
      CHECK(w.raw(i, j) == w.raw(j, i));
      CHECK(w.normalized(i, j) >= 0.0);
      row += w.normalized(i, j);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("isolated agents fall back to uniform weights") {
  const auto w = build_weights(Graphon(ZeroGraphon{}), LatentAssignment::sequential(3));
  CHECK(w.isolated().size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(w.normalized(i, j) == (i == j ? 0.0 : 0.5));
  }
}

TEST_CASE("weights need two agents and matching dimensions") {
  CHECK_THROWS(build_weights(Graphon::uniform(), LatentAssignment::sequential(1)));
  CHECK_THROWS_AS(build_weights(Graphon::radial(0.3), LatentAssignment::sequential(5)),
                  DimensionError);
}

TEST_CASE("build_weights is deterministic") {
  const auto a = build_weights(Graphon::exp_decay(1.3), LatentAssignment::sequential(30));
  const auto b = build_weights(Graphon::exp_decay(1.3), LatentAssignment::sequential(30));
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) CHECK(a.normalized(i, j) == b.normalized(i, j));
  }
}
