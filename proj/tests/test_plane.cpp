#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "brownian_atlas/plane_experiments.hpp"
#include "brownian_atlas/snake.hpp"

using namespace brownian_atlas;

TEST_CASE("segment diameter matches a brute-force scan over full rows") {
  const SnakePath s = sample_plane_snake(1.0, 40, 19);
  const FastMetric fm(s);
  const SegmentDiameter seg = segment_diameter(fm, s.grid, 0.0, 0.5);

  const int i0 = s.grid.index_of(0.0), i1 = s.grid.index_of(0.5);
  std::vector<int> targets;
  for (int i = i0; i <= i1; ++i) targets.push_back(fm.node_of_index(i));
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  double brute = 0.0;
  for (int a : targets) {
    const auto row = fm.sssp(a);
    for (int b : targets) brute = std::max(brute, row[b]);
  }
  REQUIRE(std::abs(seg.diameter - brute) <= 1e-12 * std::max(1.0, brute));
}

TEST_CASE("segment diameter obeys the label-oscillation sandwich") {
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    const SnakePath s = sample_plane_snake(1.0, 32, seed);
    const SegmentDiameter seg = segment_diameter(s, -0.25, 0.75);
    REQUIRE(seg.diameter >= 0.5 * seg.label_osc_bound);  // >= one oscillation
    REQUIRE(seg.diameter <= seg.label_osc_bound);        // <= two oscillations
  }
  const SnakePath s = sample_plane_snake(0.5, 16, 1);
  REQUIRE_THROWS_AS(segment_diameter(s, 0.4, 0.1), std::invalid_argument);
}

TEST_CASE("subsampled segment diameter lower-bounds the exact value") {
  const SnakePath s = sample_plane_snake(1.0, 48, 23);
  const SegmentDiameter exact = segment_diameter(s, 0.0, 1.0);
  const SegmentDiameter est = segment_diameter(s, 0.0, 1.0, 6);
  REQUIRE(est.diameter <= exact.diameter + 1e-15);
  REQUIRE(est.diameter >= 0.5 * exact.diameter - 1e-12);
}

TEST_CASE("scaled arms share an identical index geometry") {
  // One arm simulates a unit window at doubled resolution; its grid and
  // measured segment must line up index-for-index with the other arm, which
  // is what makes the two-sample comparison exact at the grid level.
  const int n = 24;
  const SnakePath a = sample_plane_snake(2.0, n, 1);
  const SnakePath b = sample_plane_snake(1.0, 2 * n, 1);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.grid.index_of(1.0) - a.grid.index_of(0.0) ==
          b.grid.index_of(0.5) - b.grid.index_of(0.0));
}

TEST_CASE("scaling experiment is deterministic and yields a proper p-value") {
  const ScalingReport rep = scaling_experiment(120, 32, 9);
  const ScalingReport rep2 = scaling_experiment(120, 32, 9);
  REQUIRE(rep.ks_stat == rep2.ks_stat);
  REQUIRE(rep.p_value == rep2.p_value);
  REQUIRE(rep.p_value > 0.0);
  REQUIRE(rep.p_value <= 1.0);
  REQUIRE(rep.replicas == 120);
  REQUIRE_THROWS_AS(scaling_experiment(50, 32, 9), std::invalid_argument);
}

TEST_CASE("null calibration of the scaling statistic stays near uniform") {
  const auto ps = null_scaling_calibration(6, 120, 24, 33);
  REQUIRE(ps.size() == 6);
  int pass = 0;
  for (double p : ps) {
    REQUIRE(p > 0.0);
    REQUIRE(p <= 1.0);
    if (p > 0.01) ++pass;
  }
  REQUIRE(pass >= 5);
}

TEST_CASE("tail experiment fits a survival exponent on a small pilot") {
  const TailReport rep = tail_experiment(400, {}, 128, 71);
  REQUIRE(rep.replicas == 400);
  REQUIRE(!rep.r.empty());
  REQUIRE(std::is_sorted(rep.r.begin(), rep.r.end()));
  for (double v : rep.neg_log_p) REQUIRE(v >= 0.0);
  REQUIRE(std::isfinite(rep.exponent));
  REQUIRE(rep.r2 > 0.0);
  REQUIRE(rep.r2 <= 1.0 + 1e-12);
  REQUIRE(rep.exponent > 0.0);  // heavier radii are rarer

  const TailReport again = tail_experiment(400, {}, 128, 71);
  REQUIRE(again.exponent == rep.exponent);
  REQUIRE_THROWS_AS(tail_experiment(0, {}, 128, 1), std::invalid_argument);
}

TEST_CASE("tail experiment flags starved grids instead of fitting them") {
  const TailReport rep = tail_experiment(12, {}, 64, 5);
  REQUIRE(rep.truncated);
  REQUIRE(!rep.warning.empty());
}

TEST_CASE("chunk diameters match per-chunk exact segment diameters") {
  const SnakePath s = sample_plane_snake(1.0, 32, 13);
  const auto chunks = chunk_diameters(s, 4);
  REQUIRE(chunks.size() == 4);
  for (int j = 0; j < 4; ++j) {
    const SegmentDiameter seg = segment_diameter(s, j / 4.0, (j + 1) / 4.0);
    REQUIRE(chunks[j] == seg.diameter);
  }
}

TEST_CASE("chunk cover experiment produces a decaying log-fraction fit") {
  const ChunkReport rep = chunk_cover_experiment(4, 150, 48, 3);
  REQUIRE(rep.k == 4);
  REQUIRE(rep.a.size() == rep.fraction.size());
  REQUIRE(!rep.a.empty());
  for (size_t i = 0; i < rep.fraction.size(); ++i) {
    REQUIRE(rep.fraction[i] > 0.0);
    REQUIRE(rep.fraction[i] <= 1.0);
  }
  REQUIRE(rep.slope < 0.0);  // larger thresholds exceed fewer chunk diameters
  const ChunkReport again = chunk_cover_experiment(4, 150, 48, 3);
  REQUIRE(again.slope == rep.slope);
}
