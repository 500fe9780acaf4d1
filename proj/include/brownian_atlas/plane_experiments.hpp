#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "brownian_atlas/fast_metric.hpp"
#include "brownian_atlas/parallel.hpp"
#include "brownian_atlas/rng.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/stats.hpp"

namespace brownian_atlas {

struct SegmentDiameter {
  double diameter = 0.0;
  double label_osc_bound = 0.0;  // 2 (max Y - min Y) over the segment, an upper bound
};

// Diameter of the time segment [s, t] under the quotient metric, with chains
// free to roam the whole simulated window. n_sources <= 0 computes the exact
// grid value (every segment index as a source); otherwise evenly spaced
// sources plus both label extremes.
inline SegmentDiameter segment_diameter(const FastMetric& fm, const PathGrid& grid, double s,
                                        double t, int n_sources = 0) {
  if (s > t) throw std::invalid_argument("segment_diameter: need s <= t");
  const int i0 = grid.index_of(s);
  const int i1 = grid.index_of(t);
  std::vector<int> targets;
  targets.reserve(i1 - i0 + 1);
  for (int i = i0; i <= i1; ++i) targets.push_back(fm.node_of_index(i));
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  SegmentDiameter out;
  double ymin = fm.y(targets.front()), ymax = ymin;
  for (int v : targets) {
    ymin = std::min(ymin, fm.y(v));
    ymax = std::max(ymax, fm.y(v));
  }
  out.label_osc_bound = 2.0 * (ymax - ymin);
  if (targets.size() < 2) return out;

  std::vector<int> sources;
  const int count = static_cast<int>(targets.size());
  if (n_sources <= 0 || n_sources >= count) {
    sources = targets;
  } else {
    for (int k = 0; k < n_sources; ++k)
      sources.push_back(targets[static_cast<int>((static_cast<long long>(k) * (count - 1)) /
                                                 std::max(1, n_sources - 1))]);
    int lo = targets.front(), hi = targets.front();
    for (int v : targets) {
      if (fm.y(v) < fm.y(lo)) lo = v;
      if (fm.y(v) > fm.y(hi)) hi = v;
    }
    sources.push_back(lo);
    sources.push_back(hi);
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  }
  std::vector<double> dist;
  for (int src : sources) {
    fm.sssp_targets_into(src, targets, dist);
    for (int v : targets) out.diameter = std::max(out.diameter, dist[v]);
  }
  return out;
}

inline SegmentDiameter segment_diameter(const SnakePath& snake, double s, double t,
                                        int n_sources = 0) {
  FastMetric fm(snake);
  return segment_diameter(fm, snake.grid, s, t, n_sources);
}

// ---- (t-s)^{1/4} scaling identity -----------------------------------------

struct ScalingReport {
  long replicas = 0;
  int n = 0;
  std::uint64_t seed = 0;
  double ks_stat = 0.0;
  double p_value = 0.0;
};

// Compares 2^{1/4} d*_{0,1/2} against d*_{0,1} across independent replicas.
// The half-segment arm runs on half the window at double resolution, so the
// two arms are exact scaled copies of each other in law at the grid level
// (including estimator bias): the null hypothesis is exactly true.
inline ScalingReport scaling_experiment(long replicas, int n, std::uint64_t seed,
                                        int threads = 1) {
  if (replicas < 100) throw std::invalid_argument("scaling_experiment: need replicas >= 100");
  const int n_sources = static_cast<int>(std::lround(std::sqrt(n + 1.0)));
  std::vector<double> full(replicas), half(replicas);
  parallel_for_replicas(threads, replicas, [&](long r) {
    {
      SnakePath s = sample_plane_snake(2.0, n, Rng(seed, "scaling-a", r).next_u64());
      FastMetric fm(s);
      full[r] = segment_diameter(fm, s.grid, 0.0, 1.0, n_sources).diameter;
    }
    {
      SnakePath s = sample_plane_snake(1.0, 2 * n, Rng(seed, "scaling-b", r).next_u64());
      FastMetric fm(s);
      half[r] = std::pow(2.0, 0.25) *
                segment_diameter(fm, s.grid, 0.0, 0.5, n_sources).diameter;
    }
  });
  const KsResult ks = ks_two_sample(full, half);
  return {replicas, n, seed, ks.stat, ks.p_value};
}

// Null calibration: both arms measure d*_{0,1} with scaling factor 1 from
// independent streams; returns the p-value of each meta-run.
inline std::vector<double> null_scaling_calibration(int meta_runs, long replicas, int n,
                                                    std::uint64_t seed, int threads = 1) {
  std::vector<double> p_values(meta_runs);
  const int n_sources = static_cast<int>(std::lround(std::sqrt(n + 1.0)));
  for (int m = 0; m < meta_runs; ++m) {
    std::vector<double> a(replicas), b(replicas);
    parallel_for_replicas(threads, replicas, [&](long r) {
      const long id = static_cast<long>(m) * replicas + r;
      {
        SnakePath s = sample_plane_snake(2.0, n, Rng(seed, "null-a", id).next_u64());
        FastMetric fm(s);
        a[r] = segment_diameter(fm, s.grid, 0.0, 1.0, n_sources).diameter;
      }
      {
        SnakePath s = sample_plane_snake(2.0, n, Rng(seed, "null-b", id).next_u64());
        FastMetric fm(s);
        b[r] = segment_diameter(fm, s.grid, 0.0, 1.0, n_sources).diameter;
      }
    });
    p_values[m] = ks_two_sample(a, b).p_value;
  }
  return p_values;
}

// ---- r^{4/3} diameter tail -------------------------------------------------

struct TailReport {
  std::vector<double> r;
  std::vector<double> neg_log_p;
  double exponent = 0.0;
  double exponent_se = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  long replicas = 0;
  int n = 0;
  std::uint64_t seed = 0;
  bool truncated = false;
  std::string warning;
};

// Fits log(-log P[d* >= r]) against log r over a grid of radii, where d* is
// the diameter of a unit-area map instance. An empty r_grid picks radii at
// log-spaced empirical survival levels; radii whose tail bucket has fewer
// than 20 hits are dropped and flagged.
inline TailReport tail_experiment(long replicas, std::vector<double> r_grid, int n,
                                  std::uint64_t seed, int threads = 1) {
  if (replicas < 1) throw std::invalid_argument("tail_experiment: need replicas >= 1");
  TailReport rep;
  rep.replicas = replicas;
  rep.n = n;
  rep.seed = seed;
  std::vector<double> diam(replicas);
  parallel_for_replicas(threads, replicas, [&](long r) {
    SnakePath s = sample_map_snake(n, Rng(seed, "tail", r).next_u64());
    FastMetric fm(s);
    diam[r] = fm.window_diameter(0, fm.nodes() - 1,
                                 static_cast<int>(std::lround(std::sqrt(fm.nodes()))));
  });
  std::sort(diam.begin(), diam.end());

  if (r_grid.empty()) {
    const double q_hi = 0.25;
    const double q_lo = std::max(25.0 / static_cast<double>(replicas), 2e-4);
    const int points = 12;
    for (int j = 0; j < points; ++j) {
      const double q = q_hi * std::pow(q_lo / q_hi, static_cast<double>(j) / (points - 1));
      long idx = static_cast<long>(std::floor((1.0 - q) * replicas));
      idx = std::clamp(idx, 0L, replicas - 1);  // tiny runs push q past 1
      r_grid.push_back(diam[idx]);
    }
    std::sort(r_grid.begin(), r_grid.end());
    r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
  } else {
    std::sort(r_grid.begin(), r_grid.end());
  }

  auto tail_count = [&](double r) {
    return replicas - (std::lower_bound(diam.begin(), diam.end(), r) - diam.begin());
  };
  while (!r_grid.empty() && tail_count(r_grid.back()) < 20) {
    r_grid.pop_back();
    rep.truncated = true;
  }
  if (rep.truncated) rep.warning = "r-grid truncated: largest radii had fewer than 20 tail hits";

  std::vector<double> fx, fy, fw;
  for (double r : r_grid) {
    const long cnt = tail_count(r);
    const double p = static_cast<double>(cnt) / static_cast<double>(replicas);
    rep.r.push_back(r);
    rep.neg_log_p.push_back(cnt == replicas ? 0.0 : -std::log(p));
    if (cnt == 0 || cnt == replicas || r <= 0.0) continue;
    const double lp = std::log(p);
    fx.push_back(std::log(r));
    fy.push_back(std::log(-lp));
    fw.push_back(static_cast<double>(replicas) * p * lp * lp / (1.0 - p));
  }
  if (fx.size() >= 3) {
    const LineFit fit = weighted_line_fit(fx, fy, fw);
    rep.exponent = fit.slope;
    rep.exponent_se = fit.slope_se;
    rep.intercept = fit.intercept;
    rep.r2 = fit.r2;
  } else {
    rep.truncated = true;
    rep.warning = "too few usable radii for the tail regression";
  }
  return rep;
}

// ---- chunk-cover decay -----------------------------------------------------

struct ChunkReport {
  int k = 0;
  long replicas = 0;
  int cells_per_unit = 0;
  std::uint64_t seed = 0;
  double radius_exponent = 0.25;
  std::vector<double> a;
  std::vector<double> fraction;  // P[chunk diameter > a k^{-radius_exponent}]
  double slope = 0.0;            // of log fraction vs a^{4/3}
  double r2 = 0.0;
};

// Exact diameters of the k equal time chunks of [0,1] inside the window.
inline std::vector<double> chunk_diameters(const FastMetric& fm, const PathGrid& grid, int k) {
  if (k < 1) throw std::invalid_argument("chunk_diameters: need k >= 1");
  std::vector<double> out(k);
  for (int j = 0; j < k; ++j) {
    const double s = static_cast<double>(j) / k;
    const double t = static_cast<double>(j + 1) / k;
    out[j] = segment_diameter(fm, grid, s, t, 0).diameter;
  }
  return out;
}

inline std::vector<double> chunk_diameters(const SnakePath& snake, int k) {
  FastMetric fm(snake);
  return chunk_diameters(fm, snake.grid, k);
}

// Pools chunk diameters over independent window replicas and fits the decay
// of log P[diam > a k^{-radius_exponent}] against a^{4/3}.
inline ChunkReport chunk_cover_experiment(int k, long replicas, int cells_per_unit,
                                          std::uint64_t seed, double radius_exponent = 0.25,
                                          int threads = 1) {
  if (k < 1) throw std::invalid_argument("chunk_cover_experiment: need k >= 1");
  if (replicas < 1) throw std::invalid_argument("chunk_cover_experiment: need replicas >= 1");
  ChunkReport rep;
  rep.k = k;
  rep.replicas = replicas;
  rep.cells_per_unit = cells_per_unit;
  rep.seed = seed;
  rep.radius_exponent = radius_exponent;
  std::vector<double> pool(static_cast<size_t>(k) * replicas);
  parallel_for_replicas(threads, replicas, [&](long r) {
    SnakePath s = sample_plane_snake(1.0, cells_per_unit, Rng(seed, "chunk", r).next_u64());
    FastMetric fm(s);
    const auto d = chunk_diameters(fm, s.grid, k);
    std::copy(d.begin(), d.end(), pool.begin() + static_cast<size_t>(r) * k);
  });
  std::sort(pool.begin(), pool.end());
  const double total = static_cast<double>(pool.size());
  const double scale = std::pow(static_cast<double>(k), -radius_exponent);

  const double q_hi = 0.5;
  const double q_lo = std::max(50.0 / total, 1e-3);
  const int points = 10;
  std::vector<double> fx, fy, fw;
  for (int j = 0; j < points; ++j) {
    const double q = q_hi * std::pow(q_lo / q_hi, static_cast<double>(j) / (points - 1));
    long idx = std::clamp(static_cast<long>(std::floor((1.0 - q) * total)), 0L,
                          static_cast<long>(pool.size()) - 1);
    const double threshold = pool[idx];
    const double a = threshold / scale;
    const long cnt = pool.end() - std::upper_bound(pool.begin(), pool.end(), threshold);
    const double p = static_cast<double>(cnt) / total;
    if (cnt == 0 || p >= 1.0 || a <= 0.0) continue;
    if (!rep.a.empty() && a <= rep.a.back()) continue;
    rep.a.push_back(a);
    rep.fraction.push_back(p);
    fx.push_back(std::pow(a, 4.0 / 3.0));
    fy.push_back(std::log(p));
    fw.push_back(total * p / (1.0 - p));
  }
  if (fx.size() >= 3) {
    const LineFit fit = weighted_line_fit(fx, fy, fw);
    rep.slope = fit.slope;
    rep.r2 = fit.r2;
  }
  return rep;
}

}  // namespace brownian_atlas
