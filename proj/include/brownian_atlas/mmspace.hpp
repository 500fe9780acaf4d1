#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "brownian_atlas/fast_metric.hpp"
#include "brownian_atlas/parallel.hpp"
#include "brownian_atlas/quotient_metric.hpp"
#include "brownian_atlas/rng.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/stats.hpp"

namespace brownian_atlas {

// Matrix of quotient distances between sampled points; the first |marks|
// points are fixed, the rest are i.i.d. from the uniform grid measure.
struct DistanceMatrix {
  int k = 0;
  std::vector<double> d;     // k x k, row major
  std::vector<int> marks;    // marked grid indices, occupying the leading rows
  std::vector<int> points;   // every sampled grid index
  std::uint64_t snake_hash = 0;
  std::uint64_t seed = 0;

  double at(int i, int j) const { return d[static_cast<size_t>(i) * k + j]; }
};

namespace detail {

// Uniform draw from the grid measure: the map variant's final index
// duplicates index 0 and carries no extra mass.
inline int uniform_grid_index(const SnakePath& snake, Rng& rng) {
  const int span = snake.variant == Variant::map ? snake.size() - 1 : snake.size();
  return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)));
}

inline DistanceMatrix matrix_from_points(const QuotientMetric& qm, std::vector<int> points,
                                         std::vector<int> marks, std::uint64_t seed) {
  DistanceMatrix m;
  m.k = static_cast<int>(points.size());
  m.points = std::move(points);
  m.marks = std::move(marks);
  m.snake_hash = qm.snake().hash();
  m.seed = seed;
  m.d.assign(static_cast<size_t>(m.k) * m.k, 0.0);
  for (int i = 0; i < m.k; ++i) {
    const auto& row = qm.quotient_sssp(m.points[i]);
    for (int j = i + 1; j < m.k; ++j) {
      const double v = row[m.points[j]];
      m.d[static_cast<size_t>(i) * m.k + j] = v;
      m.d[static_cast<size_t>(j) * m.k + i] = v;
    }
  }
  return m;
}

}  // namespace detail

// The exact point list a matrix draw will use, exposed so callers can
// warm per-source distance caches before the rows are computed.
inline std::vector<int> sample_matrix_points(const SnakePath& snake, int k,
                                             const std::vector<int>& marks,
                                             std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sample_distance_matrix: need k >= 1");
  if (static_cast<int>(marks.size()) > k)
    throw std::invalid_argument("sample_distance_matrix: more marks than points");
  for (int m : marks)
    if (m < 0 || m >= snake.size())
      throw std::invalid_argument("sample_distance_matrix: mark outside grid");
  std::vector<int> points(marks);
  Rng rng(seed, "matrix", 0);
  while (static_cast<int>(points.size()) < k)
    points.push_back(detail::uniform_grid_index(snake, rng));
  return points;
}

inline DistanceMatrix sample_distance_matrix(const QuotientMetric& qm, int k,
                                             const std::vector<int>& marks,
                                             std::uint64_t seed) {
  std::vector<int> points = sample_matrix_points(qm.snake(), k, marks, seed);
  return detail::matrix_from_points(qm, std::move(points), marks, seed);
}

// Restricted sampler for windowed encodings: points uniform from a support
// set (e.g. a metric ball) instead of the whole grid.
inline DistanceMatrix sample_restricted_matrix(const QuotientMetric& qm,
                                               const std::vector<int>& support, int k,
                                               std::uint64_t seed) {
  if (support.empty()) throw std::invalid_argument("sample_restricted_matrix: empty support");
  if (k < 1) throw std::invalid_argument("sample_restricted_matrix: need k >= 1");
  Rng rng(seed, "matrix-restricted", 0);
  std::vector<int> points(k);
  for (auto& p : points)
    p = support[static_cast<size_t>(rng.next_below(support.size()))];
  return detail::matrix_from_points(qm, std::move(points), {}, seed);
}

// Monte Carlo estimate of E[psi(M_k)] over a homogeneous batch of matrices.
inline MeanSe gromov_stat(const std::vector<DistanceMatrix>& matrices,
                          const std::function<double(const DistanceMatrix&)>& psi) {
  if (matrices.empty()) throw std::invalid_argument("gromov_stat: empty batch");
  for (const auto& m : matrices)
    if (m.k != matrices.front().k || m.marks.size() != matrices.front().marks.size())
      throw std::invalid_argument("gromov_stat: heterogeneous matrices");
  std::vector<double> vals(matrices.size());
  for (size_t i = 0; i < matrices.size(); ++i) vals[i] = psi(matrices[i]);
  return mean_se(vals);
}

// ---- re-rooting invariance ---------------------------------------------------

struct RerootReport {
  int n = 0;
  int t_shift = 0;
  long replicas = 0;
  std::uint64_t seed = 0;
  double ks_stat = 0.0;
  double ks_p = 0.0;
  double chi2_stat = 0.0;
  double chi2_p = 0.0;
};

// Re-rooting invariance across independent map instances: the distance from
// the root to a uniform point should match the distance from the point
// visited at t_shift to a uniform point. Also verifies that the uniform draw
// itself is flat over the grid (chi-square over bins).
inline RerootReport reroot_test(int n, int t_shift, long replicas, std::uint64_t seed,
                                int threads = 1) {
  if (replicas < 8) throw std::invalid_argument("reroot_test: need replicas >= 8");
  if (t_shift < 0 || t_shift > n) throw std::invalid_argument("reroot_test: shift outside grid");
  RerootReport rep;
  rep.n = n;
  rep.t_shift = t_shift;
  rep.replicas = replicas;
  rep.seed = seed;
  std::vector<double> from_root(replicas), from_shift(replicas);
  std::vector<int> draws(replicas);
  parallel_for_replicas(threads, replicas, [&](long r) {
    {
      SnakePath s = sample_map_snake(n, Rng(seed, "reroot-a", r).next_u64());
      FastMetric fm(s);
      Rng rng(seed, "reroot-ua", r);
      const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(fm.nodes())));
      draws[r] = u;
      from_root[r] = fm.distance(fm.node_of_index(0), u);
    }
    {
      SnakePath s = sample_map_snake(n, Rng(seed, "reroot-b", r).next_u64());
      FastMetric fm(s);
      Rng rng(seed, "reroot-ub", r);
      const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(fm.nodes())));
      from_shift[r] = fm.distance(fm.node_of_index(t_shift), u);
    }
  });
  const KsResult ks = ks_two_sample(from_root, from_shift);
  rep.ks_stat = ks.stat;
  rep.ks_p = ks.p_value;

  const int bins = 16;
  std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
  for (long r = 0; r < replicas; ++r)
    observed[static_cast<int>((static_cast<long long>(draws[r]) * bins) / n)] += 1.0;
  for (auto& e : expected) e = static_cast<double>(replicas) / bins;
  const ChiSquareResult chi = chi_square_test(observed, expected);
  rep.chi2_stat = chi.stat;
  rep.chi2_p = chi.p_value;
  return rep;
}

// ---- windowed infinite-volume encoding ----------------------------------------

struct WindowRecord {
  double r = 0.0;
  double mass = 0.0;  // time measure of the ball
  bool truncated = false;
  std::vector<int> ball;
  std::vector<int> hull;
};

// Metric balls around the root of a window instance for each radius, with
// their time-measure mass and filled hulls relative to the far window end.
// The record is flagged when the hull reaches a window endpoint, meaning the
// simulated window was too small for that radius.
inline std::vector<WindowRecord> window_encoding(const QuotientMetric& qm,
                                                 const std::vector<double>& radii) {
  if (qm.snake().variant != Variant::plane)
    throw std::invalid_argument("window_encoding: plane variant only");
  for (size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw std::invalid_argument("window_encoding: radii must be increasing");
  const int root = qm.snake().zero_index();
  const int basepoint = qm.default_plane_basepoint();
  const int far_end = basepoint == 0 ? qm.size() - 1 : 0;
  std::vector<WindowRecord> out;
  for (double r : radii) {
    WindowRecord rec;
    rec.r = r;
    rec.ball = qm.metric_ball(root, r);
    rec.mass = static_cast<double>(rec.ball.size()) * qm.snake().grid.dt;
    try {
      HullSet h = qm.filled_hull(root, r, basepoint);
      rec.hull = std::move(h.hull);
      rec.truncated = std::binary_search(rec.hull.begin(), rec.hull.end(), far_end);
    } catch (const std::invalid_argument&) {
      rec.truncated = true;  // ball swallowed the basepoint: window exhausted
      rec.hull.resize(qm.size());
      for (int i = 0; i < qm.size(); ++i) rec.hull[i] = i;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace brownian_atlas
