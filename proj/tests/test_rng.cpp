#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "brownian_atlas/rng.hpp"

using namespace brownian_atlas;

TEST_CASE("streams are reproducible and keyed by seed, tag, replica") {
  Rng a(42, "unit", 0), b(42, "unit", 0);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(42, "unit", 1), d(43, "unit", 0), e(42, "other", 0);
  Rng base(42, "unit", 0);
  const auto x = base.next_u64();
  REQUIRE(c.next_u64() != x);
  REQUIRE(d.next_u64() != x);
  REQUIRE(e.next_u64() != x);
}

TEST_CASE("replica streams do not collide over a window") {
  std::set<std::uint64_t> seen;
  for (int r = 0; r < 200; ++r) {
    Rng g(7, "collide", r);
    for (int i = 0; i < 20; ++i) seen.insert(g.next_u64());
  }
  REQUIRE(seen.size() == 200u * 20u);
}

TEST_CASE("next_unit lies in (0,1] and next_below respects its bound") {
  Rng g(1, "range", 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.next_unit();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
  Rng h(2, "below", 0);
  for (int i = 0; i < 10000; ++i) REQUIRE(h.next_below(17) < 17u);
}

TEST_CASE("next_below is close to uniform across residues") {
  Rng g(3, "uniform", 0);
  const int bins = 8;
  std::vector<int> count(bins, 0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) ++count[g.next_below(bins)];
  for (int c : count) {
    const double expect = double(n) / bins;
    REQUIRE(std::abs(c - expect) < 5.0 * std::sqrt(expect));
  }
}

TEST_CASE("gaussian draws have the right first two moments") {
  Rng g(4, "gauss", 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = g.next_gaussian();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 5.0 / std::sqrt(double(n)));
  REQUIRE(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / double(n)));
}
