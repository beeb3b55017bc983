#include <doctest.h>

#include <set>

#include "gmfs/errors.hpp"
#include "gmfs/histogram.hpp"
#include "gmfs/rng.hpp"
#include "oracles.hpp"

using namespace gmfs;

TEST_CASE("marginal sums the collapsed axis") {
  const Histogram z(Alphabet::product(2, 2), {2, 1, 1, 0});
  const Histogram g = marginal(z);
  CHECK(g.kappa() == 4);
  CHECK(std::vector<std::uint32_t>(g.counts().begin(), g.counts().end()) ==
        std::vector<std::uint32_t>{3, 1});
  const Histogram u = marginal(z, Axis::kAction);
  CHECK(std::vector<std::uint32_t>(u.counts().begin(), u.counts().end()) ==
        std::vector<std::uint32_t>{3, 1});
}

TEST_CASE("marginal of a point mass is a point mass") {
  const Histogram z(Alphabet::product(3, 2), {0, 0, 0, 5, 0, 0});
  const Histogram g = marginal(z);
  CHECK(g.count(1) == 5);
  CHECK(g.count(0) + g.count(2) == 0);
}

TEST_CASE("marginal requires a product alphabet") {
  const Histogram h(Alphabet(4), {1, 1, 1, 1});
  CHECK_THROWS_AS(marginal(h), DimensionError);
}

TEST_CASE("marginal commutes with adding histograms") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> a(6, 0);
    std::vector<std::uint32_t> b(6, 0);
    for (int k = 0; k < 4; ++k) ++a[rng.below(6)];
    for (int k = 0; k < 7; ++k) ++b[rng.below(6)];
    std::vector<std::uint32_t> sum(6);
    for (int k = 0; k < 6; ++k) sum[k] = a[k] + b[k];
    const auto ma = marginal(Histogram(Alphabet::product(3, 2), a));
    const auto mb = marginal(Histogram(Alphabet::product(3, 2), b));
    const auto ms = marginal(Histogram(Alphabet::product(3, 2), sum));
    for (int s = 0; s < 3; ++s) CHECK(ms.count(s) == ma.count(s) + mb.count(s));
  }
}

TEST_CASE("histogram rejects a zero denominator") {
  CHECK_THROWS(Histogram(Alphabet(2), {0, 0}));
}

TEST_CASE("tv distance examples") {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.75, 0.25};
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(p, q) == doctest::Approx(0.25).epsilon(1e-15));
  const Histogram a(Alphabet(3), {2, 0, 0});
  const Histogram b(Alphabet(3), {0, 0, 2});
  CHECK(tv_distance(a, b) == 1.0);
  CHECK_THROWS(tv_distance(std::vector<double>{1.0}, p));
}

TEST_CASE("tv distance is a metric on random triples") {
  Rng rng(5);
  auto random_pmf = [&](std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (auto& x : v) s += (x = rng.uniform());
    for (auto& x : v) x /= s;
    return v;
  };
  for (int t = 0; t < 200; ++t) {
    auto p = random_pmf(4);
    auto q = random_pmf(4);
    auto r = random_pmf(4);
    CHECK(tv_distance(p, q) == tv_distance(q, p));
    CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12);
    CHECK(tv_distance(p, q) >= 0.0);
    CHECK(tv_distance(p, q) <= 1.0);
  }
}

TEST_CASE("enumeration matches the colex oracle") {
  for (std::size_t cells = 1; cells <= 6; ++cells) {
    for (std::uint32_t kappa = 1; kappa <= 12; ++kappa) {
      if (cells == 6 && kappa > 8) continue;  // keeps the test quick
      const auto expected = oracle::colex_sorted(cells, kappa);
      const auto got = enumerate_histograms(cells, kappa);
      REQUIRE(got.size() == expected.size());
      CHECK(got.size() == oracle::choose(kappa + cells - 1, cells - 1));
      std::set<std::vector<std::uint32_t>> seen;
      for (std::size_t k = 0; k < got.size(); ++k) {
        const std::vector<std::uint32_t> c(got[k].counts().begin(), got[k].counts().end());
        CHECK(c == expected[k]);
        seen.insert(c);
      }
      CHECK(seen.size() == expected.size());
    }
  }
}

TEST_CASE("enumeration small examples") {
  const auto two = enumerate_histograms(2, 2);
  REQUIRE(two.size() == 3);
  CHECK(two[0].count(0) == 2);
  CHECK(two[1].count(0) == 1);
  CHECK(two[2].count(1) == 2);
  CHECK(enumerate_histograms(1, 7).size() == 1);
  CHECK(enumerate_histograms(3, 24).size() == 325);
  CHECK(histogram_count(3, 24) == 325);
}

TEST_CASE("rank and unrank are inverse") {
  const HistogramIndex two(2, 2);
  CHECK(two.rank(std::vector<std::uint32_t>{2, 0}) == 0);
  CHECK(two.rank(std::vector<std::uint32_t>{0, 2}) == 2);

  const HistogramIndex idx(3, 24);
  CHECK(idx.total() == 325);
  const auto expected = oracle::colex_sorted(3, 24);
  for (std::uint64_t r = 0; r < idx.total(); ++r) {
    const auto c = idx.unrank(r);
    CHECK(c == expected[r]);
    CHECK(idx.rank(c) == r);
  }
  CHECK_THROWS(idx.unrank(325));
  CHECK_THROWS(idx.rank(std::vector<std::uint32_t>{1, 1, 1}));
}

TEST_CASE("rank round-trips at large sizes") {
  const HistogramIndex idx(9, 30);
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const std::uint64_t r = rng.below(idx.total());
    CHECK(idx.rank(idx.unrank(r)) == r);
  }
}

TEST_CASE("next_composition walks colex order") {
  std::vector<std::uint32_t> c{3, 0, 0};
  const auto expected = oracle::colex_sorted(3, 3);
  std::size_t k = 0;
  do {
    CHECK(c == expected[k]);
    ++k;
  } while (next_composition(c));
  CHECK(k == expected.size());
}

TEST_CASE("binomial overflow is reported") {
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(3, 5) == 0);
  CHECK_THROWS_AS(binomial(200, 100), OverflowError);
  CHECK_THROWS_AS(histogram_count(200, 200), OverflowError);
}

TEST_CASE("fiber examples") {
  const Histogram g(Alphabet(2), {2, 0});
  const auto f = fiber(g, 2);
  CHECK(f.size() == 3);
  for (const auto& z : f) CHECK(marginal(z) == g);
  CHECK(fiber(Histogram(Alphabet(3), {1, 1, 1}), 1).size() == 1);
}

TEST_CASE("fibers partition the joint histograms") {
  const std::size_t ns = 3;
  const std::size_t na = 2;
  const std::uint32_t kappa = 4;
  const FiberIndex fibers(ns, na, kappa);
  std::vector<int> hits(fibers.joint().total(), 0);
  std::uint64_t total = 0;
  for (std::uint64_t g = 0; g < fibers.marginal().total(); ++g) {
    const auto members = fibers.fiber_of(g);
    const auto counts = fibers.marginal().unrank(g);
    std::uint64_t expected = 1;
    for (auto c : counts) expected *= oracle::choose(c + na - 1, na - 1);
    CHECK(members.size() == expected);
    CHECK(std::is_sorted(members.begin(), members.end()));
    for (auto z : members) {
      ++hits[z];
      CHECK(fibers.marginal_of(z) == g);
    }
    total += members.size();
  }
  CHECK(total == fibers.joint().total());
  for (int h : hits) CHECK(h == 1);
}
