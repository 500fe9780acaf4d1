#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "brownian_atlas/path_grid.hpp"
#include "brownian_atlas/rng.hpp"

namespace brownian_atlas {

// A lifetime path X together with head labels Y on the same grid.
// Cov(Y_i, Y_j) = min of X over the index interval [i..j].
struct SnakePath {
  Variant variant = Variant::map;
  PathGrid grid;               // lifetime X
  std::vector<double> labels;  // head labels Y
  std::uint64_t seed = 0;

  int size() const { return grid.size(); }
  int last() const { return grid.last(); }
  double x(int i) const { return grid.values[i]; }
  double y(int i) const { return labels[i]; }

  int zero_index() const { return variant == Variant::map ? 0 : grid.index_of(0.0); }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&h](const void* p, std::size_t len) {
      const unsigned char* c = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < len; ++i) {
        h ^= c[i];
        h *= 0x100000001b3ULL;
      }
    };
    const int v = variant == Variant::map ? 0 : 1;
    eat(&v, sizeof v);
    eat(&seed, sizeof seed);
    eat(&grid.t0, sizeof grid.t0);
    eat(&grid.dt, sizeof grid.dt);
    if (!grid.values.empty()) eat(grid.values.data(), grid.values.size() * sizeof(double));
    if (!labels.empty()) eat(labels.data(), labels.size() * sizeof(double));
    return h;
  }
};

namespace detail {

// Left-looking Cholesky with diagonal pivoting; handles semidefinite input by
// truncating at the tolerance. Row r of L corresponds to original index
// perm[r]; columns beyond `rank` are zero.
struct PivotedCholesky {
  std::vector<int> perm;
  std::vector<double> L;  // n x n row-major, lower trapezoid in pivot order
  int n = 0;
  int rank = 0;

  double l(int r, int c) const { return L[static_cast<std::size_t>(r) * n + c]; }
};

inline PivotedCholesky pivoted_cholesky(const std::vector<double>& M, int n, double tol) {
  PivotedCholesky f;
  f.n = n;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  f.L.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = M[static_cast<std::size_t>(i) * n + i];
  auto& p = f.perm;
  for (int k = 0; k < n; ++k) {
    int best = k;
    for (int r = k + 1; r < n; ++r)
      if (diag[p[r]] > diag[p[best]]) best = r;
    if (best != k) {
      std::swap(p[k], p[best]);
      // Rows of L follow pivot order, so the prefixes already written for
      // these two positions must move together with the permutation.
      for (int m = 0; m < k; ++m)
        std::swap(f.L[static_cast<std::size_t>(k) * n + m],
                  f.L[static_cast<std::size_t>(best) * n + m]);
    }
    const double piv = diag[p[k]];
    if (piv < -tol) throw std::runtime_error("pivoted_cholesky: matrix not positive semidefinite");
    if (piv <= tol) {
      f.rank = k;
      return f;
    }
    const double s = std::sqrt(piv);
    f.L[static_cast<std::size_t>(k) * n + k] = s;
    for (int r = k + 1; r < n; ++r) {
      double v = M[static_cast<std::size_t>(p[r]) * n + p[k]];
      const double* rowr = &f.L[static_cast<std::size_t>(r) * n];
      const double* rowk = &f.L[static_cast<std::size_t>(k) * n];
      for (int m = 0; m < k; ++m) v -= rowr[m] * rowk[m];
      const double lrk = v / s;
      f.L[static_cast<std::size_t>(r) * n + k] = lrk;
      diag[p[r]] -= lrk * lrk;
    }
  }
  f.rank = n;
  return f;
}

}  // namespace detail

// Dense covariance sampler: factorizes the (n+1)^2 interval-minimum matrix
// once, then draws label vectors with exactly that covariance. Memory and
// time are quadratic/cubic, hence the size cap.
class ExactSnakeSampler {
 public:
  ExactSnakeSampler(const PathGrid& lifetime, Variant variant, int cap = 4096)
      : grid_(lifetime), variant_(variant) {
    const int n = grid_.size();
    if (n > cap)
      throw std::length_error(
          "ExactSnakeSampler: grid larger than cap; use sample_snake_sequential for long paths");
    double xmax = 0.0;
    for (double v : grid_.values) xmax = std::max(xmax, std::abs(v));
    std::vector<double> M(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      double run = grid_.values[i];
      M[static_cast<std::size_t>(i) * n + i] = run;
      for (int j = i + 1; j < n; ++j) {
        run = std::min(run, grid_.values[j]);
        M[static_cast<std::size_t>(i) * n + j] = run;
        M[static_cast<std::size_t>(j) * n + i] = run;
      }
    }
    factor_ = detail::pivoted_cholesky(M, n, 1e-10 * std::max(xmax, 1e-300));
  }

  SnakePath draw(std::uint64_t seed, std::uint64_t replica = 0) const {
    const int n = grid_.size();
    Rng rng(seed, "snake-exact", replica);
    std::vector<double> xi(factor_.rank);
    for (double& v : xi) v = rng.next_gaussian();
    SnakePath s;
    s.variant = variant_;
    s.grid = grid_;
    s.seed = seed;
    s.labels.assign(n, 0.0);
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      const double* row = &factor_.L[static_cast<std::size_t>(r) * n];
      const int lim = std::min(factor_.rank, r + 1);
      for (int m = 0; m < lim; ++m) acc += row[m] * xi[m];
      s.labels[factor_.perm[r]] = acc;
    }
    return s;
  }

  int rank() const { return factor_.rank; }

 private:
  PathGrid grid_;
  Variant variant_;
  detail::PivotedCholesky factor_;
};

inline SnakePath sample_snake_exact(const PathGrid& lifetime, Variant variant, std::uint64_t seed,
                                    int cap = 4096) {
  return ExactSnakeSampler(lifetime, variant, cap).draw(seed);
}

// Sequential sampler, same law in O(n): walk the grid keeping the spine of
// conditioned (height, label) points. Growth extends the head by an
// independent Gaussian; retraction to height h draws the spine label at h
// from the Brownian bridge between the two neighboring conditioned points.
inline SnakePath sample_snake_sequential(const PathGrid& lifetime, Variant variant,
                                         std::uint64_t seed) {
  const int n = lifetime.size();
  for (double v : lifetime.values)
    if (v < 0.0) throw std::invalid_argument("sample_snake_sequential: lifetime must be nonnegative");
  Rng rng(seed, "snake-seq", 0);
  struct Spine {
    double h, y;
  };
  std::vector<Spine> spine;
  spine.reserve(n + 1);
  spine.push_back({0.0, 0.0});
  SnakePath s;
  s.variant = variant;
  s.grid = lifetime;
  s.seed = seed;
  s.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double h = lifetime.values[i];
    const double g = rng.next_gaussian();
    if (h >= spine.back().h) {
      const double y = spine.back().y + std::sqrt(h - spine.back().h) * g;
      spine.push_back({h, y});
      s.labels[i] = y;
      continue;
    }
    Spine above = spine.back();
    while (spine.back().h > h) {
      above = spine.back();
      spine.pop_back();
    }
    const Spine below = spine.back();
    const double span = above.h - below.h;
    const double frac = (h - below.h) / span;
    const double mean = below.y + frac * (above.y - below.y);
    const double var = (h - below.h) * (above.h - h) / span;
    const double y = mean + std::sqrt(std::max(0.0, var)) * g;
    spine.push_back({h, y});
    s.labels[i] = y;
  }
  return s;
}

// Convenience constructors for the two variants.
inline SnakePath sample_map_snake(int n, std::uint64_t seed) {
  return sample_snake_sequential(sample_excursion(n, seed), Variant::map, seed);
}

inline SnakePath sample_plane_snake(double T, int cells_per_unit, std::uint64_t seed) {
  return sample_snake_sequential(sample_plane_lifetime(T, cells_per_unit, seed), Variant::plane,
                                 seed);
}

}  // namespace brownian_atlas
